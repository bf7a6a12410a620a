// Regenerates the frozen golden fixtures under tests/golden/. Run manually
// after an intentional change to prompts, serialization, or the control
// loop, then review the diff:
//
//   ./gen_fixtures <repo>/tests/golden
#include <fstream>
#include <iostream>
#include <memory>

#include "pf/orchestrator.hpp"
#include "pf/postprocess.hpp"
#include "pf/provider.hpp"
#include "pf/serialize.hpp"
#include "support.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gen_fixtures <golden-dir>\n";
        return 1;
    }
    const std::string dir = argv[1];

    auto scripted =
        std::make_shared<pf::ScriptedProvider>(pftest::two_round_agreement_script());
    pf::RecordingProvider recorder(scripted);
    const pf::Dialogue dialogue =
        pf::generate_dialogue(pftest::flowers_task(), pftest::base_config(), recorder);

    {
        std::ofstream out(dir + "/two_round_agreement.jsonl", std::ios::binary);
        if (!out) {
            std::cerr << "cannot write to " << dir << '\n';
            return 1;
        }
        out << pf::serialize_dialogue(dialogue) << '\n';
    }
    recorder.cassette().save(dir + "/two_round_agreement_cassette.jsonl");

    // Identity postprocessing cassette for the same dialogue.
    auto identity = std::make_shared<pf::ScriptedProvider>(
        std::vector<std::string>{pftest::identity_envelope(dialogue)});
    pf::RecordingProvider pp_recorder(identity);
    pf::postprocess_dialogue(dialogue, pftest::base_config(), pp_recorder);
    pp_recorder.cassette().save(dir + "/postprocess_identity_cassette.jsonl");

    std::cout << "wrote two_round_agreement.jsonl ("
              << pf::serialize_dialogue(dialogue).size() << " bytes), its cassette ("
              << recorder.cassette().exchanges.size()
              << " exchanges), and the postprocess identity cassette\n";
    return 0;
}
