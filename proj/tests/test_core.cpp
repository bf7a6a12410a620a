#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "pf/core.hpp"
#include "support.hpp"

using namespace pf;

TEST_CASE("canonical strategy order is a bijection onto 0..8") {
    CHECK(canonical_strategy_index(StrategyTag::Popularity) == 0);
    CHECK(canonical_strategy_index(StrategyTag::Emotion) == 8);
    CHECK(canonical_strategy_index(StrategyTag::Scarcity) == 6);

    std::set<int> seen;
    for (std::size_t i = 0; i < kStrategyCount; ++i) {
        const auto tag = strategy_tag_from_index(static_cast<int>(i));
        const int idx = canonical_strategy_index(tag);
        CHECK(idx == static_cast<int>(i));
        seen.insert(idx);
    }
    CHECK(seen.size() == kStrategyCount);
    CHECK_THROWS_AS(strategy_tag_from_index(9), std::out_of_range);
    CHECK_THROWS_AS(strategy_tag_from_index(-1), std::out_of_range);
}

TEST_CASE("strategy names round-trip through the parser") {
    for (std::size_t i = 0; i < kStrategyCount; ++i) {
        const auto tag = strategy_tag_from_index(static_cast<int>(i));
        const auto parsed = parse_strategy_tag(strategy_tag_name(tag));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == tag);
    }
    CHECK(parse_strategy_tag("logical appeal") == StrategyTag::LogicalAppeal);
    CHECK(parse_strategy_tag("threat_promise") == StrategyTag::ThreatPromise);
    CHECK_FALSE(parse_strategy_tag("bribery").has_value());
}

TEST_CASE("speaker labels") {
    CHECK(speaker_label(SpeakerId{Role::Persuader, 0}) == "PERSUADER");
    CHECK(speaker_label(SpeakerId{Role::Persuader, 1}) == "PERSUADER_2");
    CHECK(speaker_label(SpeakerId{Role::Persuadee, 0}) == "PERSUADEE");

    CHECK(parse_speaker_label("persuader") == SpeakerId{Role::Persuader, 0});
    CHECK(parse_speaker_label("PERSUADER_1") == SpeakerId{Role::Persuader, 0});
    CHECK(parse_speaker_label(" Persuader_3 ") == SpeakerId{Role::Persuader, 2});
    CHECK(parse_speaker_label("PERSUADEE") == SpeakerId{Role::Persuadee, 0});
    CHECK_FALSE(parse_speaker_label("moderator").has_value());
    CHECK_FALSE(parse_speaker_label("persuader_0").has_value());
}

TEST_CASE("validate_dialogue accepts a well-formed dialogue") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const Dialogue d = pftest::random_dialogue(rng);
        CHECK(validate_dialogue(d).empty());
    }
}

namespace {

Dialogue small_dialogue() {
    std::mt19937_64 rng(3);
    Dialogue d = pftest::random_dialogue(rng);
    while (d.rounds.size() < 3 || d.config_snapshot.n_persuaders != 1) {
        d = pftest::random_dialogue(rng);
    }
    return d;
}

bool mentions(const std::vector<std::string>& violations, const std::string& needle) {
    for (const auto& v : violations) {
        if (v.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("validate_dialogue flags a score out of [0,1] with its round index") {
    Dialogue d = small_dialogue();
    d.rounds[1].scores[SpeakerId{Role::Persuader, 0}] = 1.2;
    const auto violations = validate_dialogue(d);
    REQUIRE_FALSE(violations.empty());
    CHECK(mentions(violations, "round 2"));
    CHECK(mentions(violations, "score out of [0,1]"));
}

TEST_CASE("validate_dialogue flags a missing score vector") {
    Dialogue d = small_dialogue();
    d.rounds.back().scores.clear();
    CHECK(mentions(validate_dialogue(d), "score/round count mismatch"));
}

TEST_CASE("validate_dialogue flags empty refined text and revision overruns") {
    Dialogue d = small_dialogue();
    d.rounds[0].utterances[0].refined_text.clear();
    d.rounds[0].utterances[1].revision_count = d.config_snapshot.revision_cap + 1;
    const auto violations = validate_dialogue(d);
    CHECK(mentions(violations, "refined_text empty"));
    CHECK(mentions(violations, "revision_count exceeds"));
}

TEST_CASE("validate_dialogue flags empty task fields and empty rounds") {
    Dialogue d = small_dialogue();
    d.task.behavior.clear();
    d.rounds.clear();
    const auto violations = validate_dialogue(d);
    CHECK(mentions(violations, "behavior is empty"));
    CHECK(mentions(violations, "rounds is empty"));
}

TEST_CASE("directive sentences are the verbatim initialization strings") {
    CHECK(strategy_directive_sentence(StrategyDirective::Logical) ==
          "Use only logical strategies in the persuasion attempts.");
    CHECK(strategy_directive_sentence(StrategyDirective::Emotional) ==
          "Use only emotional strategies in the persuasion attempts.");
}
