// persuaforge: generate, postprocess, and evaluate persuasive dialogues.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pf/config.hpp"
#include "pf/core.hpp"
#include "pf/http_provider.hpp"
#include "pf/metrics.hpp"
#include "pf/orchestrator.hpp"
#include "pf/postprocess.hpp"
#include "pf/prompts.hpp"
#include "pf/provider.hpp"
#include "pf/serialize.hpp"

namespace {

// Exit codes (also documented in the README).
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitProvider = 4;
constexpr int kExitPartialFailure = 5;

std::string format_number(double v) { return nlohmann::json(v).dump(); }

struct ProviderChoice {
    std::shared_ptr<pf::Provider> provider;
    std::shared_ptr<pf::RecordingProvider> recorder;  // set when recording
    bool deterministic_replay = false;
};

ProviderChoice make_provider(const pf::ProviderSettings& settings,
                             const std::string& record_path, const std::string& replay_path) {
    ProviderChoice choice;
    if (!replay_path.empty()) {
        choice.provider = std::make_shared<pf::ReplayProvider>(pf::Cassette::load(replay_path));
        choice.deterministic_replay = true;
        return choice;
    }
    if (settings.base_url.empty()) {
        throw pf::ConfigError(
            "no provider: set base_url in the config file or PF_BASE_URL, or pass --replay");
    }
    auto live = std::make_shared<pf::HttpProvider>(settings.base_url, settings.api_key);
    if (!record_path.empty()) {
        choice.recorder = std::make_shared<pf::RecordingProvider>(live);
        choice.provider = choice.recorder;
    } else {
        choice.provider = live;
    }
    return choice;
}

pf::PromptLibrary load_prompts(const pf::LoadedConfig& cfg) {
    pf::PromptLibrary prompts = pf::PromptLibrary::builtin();
    if (!cfg.prompt_dir.empty()) prompts.load_directory(cfg.prompt_dir);
    return prompts;
}

// Writes dialogues to a JSONL stream in input order as soon as every
// earlier ordinal has completed, flushing per line.
class OrderedDialogueWriter {
  public:
    OrderedDialogueWriter(std::ostream& out, std::size_t total) : out_(out), ready_(total) {}

    void deliver(std::size_t ordinal, const pf::Dialogue& d) {
        ready_[ordinal] = pf::serialize_dialogue(d);
        while (next_ < ready_.size() && ready_[next_]) {
            out_ << *ready_[next_] << '\n';
            out_.flush();
            ready_[next_].reset();
            ++next_;
        }
    }

    // Failed ordinals never deliver; once the batch is done, flush whatever
    // completed after the first gap.
    void finish() {
        for (; next_ < ready_.size(); ++next_) {
            if (ready_[next_]) {
                out_ << *ready_[next_] << '\n';
                out_.flush();
                ready_[next_].reset();
            }
        }
    }

  private:
    std::ostream& out_;
    std::vector<std::optional<std::string>> ready_;
    std::size_t next_ = 0;
};

int run_generate(const std::string& tasks_path, const std::string& config_path,
                 const std::string& out_path, std::optional<long long> seed,
                 std::size_t parallel, const std::string& record_path,
                 const std::string& replay_path, const std::vector<std::string>& strategies,
                 std::optional<std::size_t> n_persuaders) {
    pf::LoadedConfig cfg = pf::load_config_file(config_path);
    pf::apply_env_overrides(cfg.provider);
    if (seed) cfg.run.seed = *seed;
    if (n_persuaders) {
        if (*n_persuaders >= 2) {
            cfg.run = pf::configure_multi_party(cfg.run, *n_persuaders);
        } else if (*n_persuaders == 1) {
            cfg.run.n_persuaders = 1;
        } else {
            throw pf::ConfigError("--n-persuaders must be >= 1");
        }
    }
    for (const std::string& entry : strategies) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw pf::ConfigError("--strategy expects SPEAKER=logical|emotional, got: " + entry);
        }
        const auto speaker = pf::parse_speaker_label(entry.substr(0, eq));
        const auto directive = pf::parse_strategy_directive(entry.substr(eq + 1));
        if (!speaker || !directive) {
            throw pf::ConfigError("bad --strategy entry: " + entry);
        }
        cfg.run = pf::apply_strategy_control(cfg.run, *speaker, *directive);
    }

    const std::vector<pf::PersuasionTask> tasks = pf::load_task_file(tasks_path);
    const pf::PromptLibrary prompts = load_prompts(cfg);

    ProviderChoice choice = make_provider(cfg.provider, record_path, replay_path);
    if ((choice.deterministic_replay || choice.recorder) && parallel > 1) {
        std::cerr << "note: cassettes are ordered; forcing --parallel 1\n";
        parallel = 1;
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw pf::IoError("cannot write output file: " + out_path);

    OrderedDialogueWriter writer(out, tasks.size());
    pf::BatchResult result = pf::generate_batch(
        tasks, cfg.run,
        [&choice](const pf::PersuasionTask&, std::size_t) { return choice.provider; },
        parallel == 0 ? 1 : parallel, prompts,
        [&writer](std::size_t ordinal, const pf::Dialogue& d) { writer.deliver(ordinal, d); });
    writer.finish();

    if (choice.recorder && !record_path.empty()) {
        choice.recorder->cassette().save(record_path);
    }

    for (const pf::BatchFailure& f : result.failures) {
        std::cerr << "task " << f.task_id << ": " << f.reason << '\n';
    }
    if (!result.failures.empty()) {
        std::cerr << result.failures.size() << " of " << tasks.size() << " tasks failed\n";
        return kExitPartialFailure;
    }
    return kExitOk;
}

int run_postprocess(const std::string& in_path, const std::string& out_path,
                    const std::string& config_path, const std::string& replay_path) {
    pf::LoadedConfig cfg = pf::load_config_file(config_path);
    pf::apply_env_overrides(cfg.provider);
    const pf::PromptLibrary prompts = load_prompts(cfg);
    const std::vector<pf::Dialogue> dialogues = pf::load_dialogue_file(in_path);

    ProviderChoice choice = make_provider(cfg.provider, "", replay_path);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw pf::IoError("cannot write output file: " + out_path);

    std::size_t failures = 0;
    for (std::size_t i = 0; i < dialogues.size(); ++i) {
        try {
            const pf::Dialogue polished =
                pf::postprocess_dialogue(dialogues[i], cfg.run, *choice.provider, prompts);
            out << pf::serialize_dialogue(polished) << '\n';
            out.flush();
        } catch (const std::exception& e) {
            std::cerr << "dialogue " << (i + 1) << " (task " << dialogues[i].task.task_id
                      << "): " << e.what() << '\n';
            ++failures;
        }
    }
    if (failures) {
        std::cerr << failures << " of " << dialogues.size() << " dialogues failed\n";
        return kExitPartialFailure;
    }
    return kExitOk;
}

std::vector<int> parse_categories(const std::string& spec) {
    std::vector<int> categories;
    std::stringstream in(spec);
    std::string part;
    while (std::getline(in, part, ',')) {
        try {
            categories.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw pf::ConfigError("--categories expects integers, got: " + part);
        }
    }
    if (categories.empty()) throw pf::ConfigError("--categories is empty");
    return categories;
}

int run_eval_kappa(const std::string& a_path, const std::string& b_path,
                   const std::string& weighted, const std::string& categories_spec) {
    const auto rows_a = pf::load_ratings_csv(a_path);
    const auto rows_b = pf::load_ratings_csv(b_path);
    const auto [a, b] = pf::paired_series(rows_a, rows_b);
    const std::vector<int> categories = parse_categories(categories_spec);

    bool degenerate = false;
    std::cout << "kappa=" << format_number(pf::cohen_kappa(a, b, categories, &degenerate))
              << '\n';
    if (weighted == "linear") {
        std::cout << "weighted_kappa_linear="
                  << format_number(pf::weighted_kappa_linear(a, b, categories, &degenerate))
                  << '\n';
    } else if (!weighted.empty()) {
        throw pf::ConfigError("--weighted supports only 'linear'");
    }
    if (degenerate) {
        std::cerr << "warning: degenerate data (a single identical category everywhere)\n";
    }
    return kExitOk;
}

int run_eval_strategies(const std::string& tags_path, const std::string& out_path) {
    const auto records = pf::load_tags_jsonl(tags_path);
    const auto [ids, dists] = pf::group_distributions(records);
    const auto matrix = pf::similarity_matrix(dists);
    pf::save_matrix_csv(out_path, ids, matrix);
    std::cout << "dialogues=" << ids.size() << '\n';
    return kExitOk;
}

int run_eval_differentiation(const std::string& records_path) {
    const auto records = pf::load_differentiation_csv(records_path);
    const pf::DifferentiationStats stats = pf::differentiation_stats(records);
    std::cout << "both_correct=" << format_number(stats.both_correct) << '\n'
              << "disagree=" << format_number(stats.disagree) << '\n'
              << "both_wrong=" << format_number(stats.both_wrong) << '\n'
              << "random_baseline=" << format_number(stats.random_baseline) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"persuaforge: multi-agent persuasive dialogue generation and evaluation"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Generate dialogues from a task file");
    std::string tasks_path, config_path, out_path, record_path, replay_path;
    std::vector<std::string> strategies;
    std::optional<long long> seed;
    std::optional<std::size_t> n_persuaders;
    std::size_t parallel = 1;
    generate->add_option("--tasks", tasks_path, "task JSONL file")->required();
    generate->add_option("--config", config_path, "run config file")->required();
    generate->add_option("--out", out_path, "output dialogue JSONL file")->required();
    generate->add_option("--seed", seed, "override the config seed");
    generate->add_option("--parallel", parallel, "number of dialogue workers");
    auto* rec = generate->add_option("--record", record_path, "record exchanges to a cassette");
    auto* rep = generate->add_option("--replay", replay_path, "replay exchanges from a cassette");
    rec->excludes(rep);
    generate->add_option("--strategy", strategies,
                         "SPEAKER=logical|emotional directive (repeatable)");
    generate->add_option("--n-persuaders", n_persuaders, "persuaders on the persuading side");

    // postprocess
    auto* postprocess = app.add_subcommand("postprocess", "Smooth finished dialogues");
    std::string pp_in, pp_out, pp_config, pp_replay;
    postprocess->add_option("--in", pp_in, "input dialogue JSONL file")->required();
    postprocess->add_option("--out", pp_out, "output dialogue JSONL file")->required();
    postprocess->add_option("--config", pp_config, "run config file")->required();
    postprocess->add_option("--replay", pp_replay, "replay exchanges from a cassette");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluation metrics");
    eval->require_subcommand(1);
    auto* kappa = eval->add_subcommand("kappa", "Inter-rater agreement between two rating files");
    std::string kappa_a, kappa_b, kappa_weighted, kappa_categories = "1,2,3";
    kappa->add_option("--a", kappa_a, "first annotator ratings CSV")->required();
    kappa->add_option("--b", kappa_b, "second annotator ratings CSV")->required();
    kappa->add_option("--weighted", kappa_weighted, "also compute a weighted kappa (linear)");
    kappa->add_option("--categories", kappa_categories, "ordered category set (default 1,2,3)");

    auto* strategies_cmd = eval->add_subcommand("strategies", "Strategy distribution similarity");
    std::string tags_path, matrix_out;
    strategies_cmd->add_option("--tags", tags_path, "per-utterance tags JSONL")->required();
    strategies_cmd->add_option("--out", matrix_out, "similarity matrix CSV")->required();

    auto* differentiation = eval->add_subcommand("differentiation",
                                                 "Human/model differentiation statistics");
    std::string records_path;
    differentiation->add_option("--records", records_path, "differentiation records CSV")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            return run_generate(tasks_path, config_path, out_path, seed, parallel, record_path,
                                replay_path, strategies, n_persuaders);
        }
        if (postprocess->parsed()) {
            return run_postprocess(pp_in, pp_out, pp_config, pp_replay);
        }
        if (kappa->parsed()) {
            return run_eval_kappa(kappa_a, kappa_b, kappa_weighted, kappa_categories);
        }
        if (strategies_cmd->parsed()) {
            return run_eval_strategies(tags_path, matrix_out);
        }
        if (differentiation->parsed()) {
            return run_eval_differentiation(records_path);
        }
    } catch (const pf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const pf::ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitIo;
    } catch (const pf::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const pf::MetricsError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitIo;
    } catch (const pf::ProviderError& e) {
        std::cerr << "provider error: " << e.what() << '\n';
        return kExitProvider;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}
