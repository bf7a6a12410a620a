#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pf/agents.hpp"
#include "support.hpp"

using namespace pf;

namespace {

const SpeakerId kPersuader{Role::Persuader, 0};
const SpeakerId kPersuadee{Role::Persuadee, 0};

constexpr const char* kLogicalSentence =
    "Use only logical strategies in the persuasion attempts.";
constexpr const char* kEmotionalSentence =
    "Use only emotional strategies in the persuasion attempts.";

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("system prompts embed the task behavior and goals") {
    const auto task = pftest::flowers_task();
    const auto cfg = pftest::base_config();
    const auto& prompts = PromptLibrary::builtin();

    const std::string persuader =
        render_system_prompt(prompts, AgentRole::Generator, task, cfg, kPersuader);
    CHECK(contains(persuader, task.behavior));
    CHECK(contains(persuader, task.persuader_goal));
    CHECK_FALSE(contains(persuader, kLogicalSentence));
    CHECK_FALSE(contains(persuader, kEmotionalSentence));

    const std::string persuadee =
        render_system_prompt(prompts, AgentRole::Generator, task, cfg, kPersuadee);
    CHECK(contains(persuadee, task.persuadee_goal));
}

TEST_CASE("the strategy directive sentence appears iff configured") {
    const auto task = pftest::flowers_task();
    auto cfg = pftest::base_config();
    cfg.strategy_directive[kPersuader] = StrategyDirective::Logical;
    const auto& prompts = PromptLibrary::builtin();

    const std::string persuader =
        render_system_prompt(prompts, AgentRole::Generator, task, cfg, kPersuader);
    const std::string persuadee =
        render_system_prompt(prompts, AgentRole::Generator, task, cfg, kPersuadee);
    CHECK(contains(persuader, kLogicalSentence));
    CHECK_FALSE(contains(persuadee, kLogicalSentence));
    CHECK_FALSE(contains(persuader, kEmotionalSentence));
}

TEST_CASE("the annotator prompt instructs the score range and both scoring examples") {
    const std::string prompt = render_system_prompt(
        PromptLibrary::builtin(), AgentRole::Annotator, pftest::flowers_task(),
        pftest::base_config());
    CHECK(contains(prompt, "ranging from 0 to 1"));
    CHECK(contains(prompt, "PERSUADER: 0.0"));
    CHECK(contains(prompt, "PERSUADER: 1.0"));
}

TEST_CASE("rendering fails on a placeholder with no binding") {
    PromptTemplate tmpl{"custom", "Hello {WHO}, about {TOPIC}"};
    CHECK(render_template(tmpl, {{"WHO", "you"}, {"TOPIC", "x"}}) == "Hello you, about x");
    CHECK_THROWS_AS(render_template(tmpl, {{"WHO", "you"}}), MissingPlaceholderError);
}

TEST_CASE("substituted values are not re-scanned for placeholders") {
    PromptTemplate tmpl{"custom", "task: {TASK}"};
    CHECK(render_template(tmpl, {{"TASK", "braces {LIKE_THIS} stay"}}) ==
          "task: braces {LIKE_THIS} stay");
}

TEST_CASE("the first persuader call is the literal opener") {
    ScriptedProvider provider({"raw opener"});
    GeneratorAgent gen(kPersuader, pftest::flowers_task(), pftest::base_config(),
                       PromptLibrary::builtin(), provider);
    CHECK(gen.open() == "raw opener");
    REQUIRE(provider.requests().size() == 1);
    CHECK(provider.requests()[0].messages.back().content == "Start the conversation.");
    CHECK(provider.requests()[0].messages.back().role == MessageRole::User);
}

TEST_CASE("a relayed turn carries the counterpart text") {
    ScriptedProvider provider({"reply"});
    GeneratorAgent gen(kPersuadee, pftest::flowers_task(), pftest::base_config(),
                       PromptLibrary::builtin(), provider);
    gen.respond("the persuader said X");
    CHECK(contains(provider.requests()[0].messages.back().content, "the persuader said X"));
}

TEST_CASE("a refusal finish surfaces as provider_refusal with the role attached") {
    auto provider = ScriptedProvider::from_entries({{"I refuse.", FinishReason::Refusal}});
    GeneratorAgent gen(kPersuader, pftest::flowers_task(), pftest::base_config(),
                       PromptLibrary::builtin(), provider);
    try {
        gen.open();
        FAIL("expected provider_refusal");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderError::Kind::Refusal);
        CHECK(e.agent() == "PERSUADER");
    }
}

TEST_CASE("monitor pass grows memory by one utterance in one exchange") {
    ScriptedProvider provider({"PASS"});
    MonitorAgent monitor(pftest::flowers_task(), pftest::base_config(),
                         PromptLibrary::builtin(), provider);
    const std::size_t before = monitor.agent().memory().history.size();
    const MonitorVerdict verdict = monitor.check(kPersuader, "a fine utterance");
    CHECK_FALSE(verdict.flagged());
    CHECK(monitor.agent().memory().history.size() == before + 1);
    CHECK(provider.calls() == 1);
}

TEST_CASE("monitor flag parses the kind and diagnosis and stores nothing") {
    ScriptedProvider provider({"FLAG: repeats_previous | near-duplicate of turn 3"});
    MonitorAgent monitor(pftest::flowers_task(), pftest::base_config(),
                         PromptLibrary::builtin(), provider);
    const std::size_t before = monitor.agent().memory().history.size();
    const MonitorVerdict verdict = monitor.check(kPersuader, "same thing again");
    REQUIRE(verdict.flagged());
    REQUIRE(verdict.issues.size() == 1);
    CHECK(verdict.issues[0].kind == MonitorIssueKind::RepeatsPrevious);
    CHECK(verdict.issues[0].diagnosis == "near-duplicate of turn 3");
    CHECK(monitor.agent().memory().history.size() == before);
}

TEST_CASE("a prose monitor reply is an unparseable verdict") {
    ScriptedProvider provider({"well, it seems fine to me overall"});
    MonitorAgent monitor(pftest::flowers_task(), pftest::base_config(),
                         PromptLibrary::builtin(), provider);
    try {
        monitor.check(kPersuader, "anything");
        FAIL("expected unparseable_verdict");
    } catch (const AgentOutputError& e) {
        CHECK(e.kind() == AgentOutputError::Kind::UnparseableVerdict);
    }
}

TEST_CASE("with one format retry the monitor recovers from a prose reply") {
    ScriptedProvider provider({"hmm, looks ok to me", "PASS"});
    MonitorAgent monitor(pftest::flowers_task(), pftest::base_config(),
                         PromptLibrary::builtin(), provider, 1);
    CHECK_FALSE(monitor.check(kPersuader, "anything").flagged());
    CHECK(provider.calls() == 2);
    // The reminder exchange continues the same conversation.
    CHECK(contains(provider.requests()[1].messages.back().content, "Format reminder"));
}

TEST_CASE("refiner echoes and strips per its script") {
    SUBCASE("identity script") {
        ScriptedProvider provider({"same text"});
        RefinerAgent refiner(pftest::flowers_task(), pftest::base_config(),
                             PromptLibrary::builtin(), provider);
        CHECK(refiner.refine("same text") == "same text");
    }
    SUBCASE("softener removal") {
        ScriptedProvider provider({"X"});
        RefinerAgent refiner(pftest::flowers_task(), pftest::base_config(),
                             PromptLibrary::builtin(), provider);
        CHECK(refiner.refine("I understand your concerns, but X") == "X");
    }
}

TEST_CASE("refining empty text is rejected before any provider call") {
    ScriptedProvider provider({"never used"});
    RefinerAgent refiner(pftest::flowers_task(), pftest::base_config(),
                         PromptLibrary::builtin(), provider);
    CHECK_THROWS_AS(refiner.refine(""), std::invalid_argument);
    CHECK(provider.calls() == 0);
}

TEST_CASE("the refiner memory carries its two worked examples") {
    ScriptedProvider provider({"x"});
    RefinerAgent refiner(pftest::flowers_task(), pftest::base_config(),
                         PromptLibrary::builtin(), provider);
    // system + 2 user/assistant pairs
    CHECK(refiner.agent().memory().history.size() == 5);
}

TEST_CASE("annotator parses one score per speaker") {
    ScriptedProvider provider({"PERSUADER: 0.0\nPERSUADEE: 0.0"});
    AnnotatorAgent annotator(pftest::flowers_task(), pftest::base_config(),
                             PromptLibrary::builtin(), provider);
    const auto scores = annotator.annotate_round(1, "PERSUADER: a\nPERSUADEE: b",
                                                 {kPersuader, kPersuadee});
    CHECK(scores.at(kPersuader) == 0.0);
    CHECK(scores.at(kPersuadee) == 0.0);
}

TEST_CASE("a full capitulation score parses as 1.0") {
    ScriptedProvider provider({"PERSUADER: 1.0\nPERSUADEE: 0.1"});
    AnnotatorAgent annotator(pftest::flowers_task(), pftest::base_config(),
                             PromptLibrary::builtin(), provider);
    const auto scores = annotator.annotate_round(1, "transcript", {kPersuader, kPersuadee});
    CHECK(scores.at(kPersuader) == 1.0);
}

TEST_CASE("an out-of-range score is rejected") {
    ScriptedProvider provider({"PERSUADER: 1.5\nPERSUADEE: 0.1"});
    AnnotatorAgent annotator(pftest::flowers_task(), pftest::base_config(),
                             PromptLibrary::builtin(), provider);
    try {
        annotator.annotate_round(1, "transcript", {kPersuader, kPersuadee});
        FAIL("expected score_out_of_range");
    } catch (const AgentOutputError& e) {
        CHECK(e.kind() == AgentOutputError::Kind::ScoreOutOfRange);
    }
}

TEST_CASE("regulator two-phase outcomes") {
    const auto task = pftest::flowers_task();
    const auto cfg = pftest::base_config();
    const auto& prompts = PromptLibrary::builtin();

    SUBCASE("OK then CONTINUE") {
        ScriptedProvider provider({"OK", "CONTINUE"});
        RegulatorAgent regulator(task, cfg, prompts, provider);
        const auto verdict = regulator.regulate(1, "transcript", "scores");
        CHECK(verdict.outcome == RegulationVerdict::Outcome::Continue);
        CHECK(provider.calls() == 2);
    }
    SUBCASE("REVISE carries feedback and skips phase 2") {
        ScriptedProvider provider({"REVISE: persuadee ignored the new argument"});
        RegulatorAgent regulator(task, cfg, prompts, provider);
        const auto verdict = regulator.regulate(1, "transcript", "scores");
        CHECK(verdict.outcome == RegulationVerdict::Outcome::Revise);
        CHECK(verdict.feedback == "persuadee ignored the new argument");
        CHECK(provider.calls() == 1);
    }
    SUBCASE("OK then TERMINATE stagnation") {
        ScriptedProvider provider({"OK", "TERMINATE: stagnation"});
        RegulatorAgent regulator(task, cfg, prompts, provider);
        const auto verdict = regulator.regulate(1, "transcript", "scores");
        CHECK(verdict.outcome == RegulationVerdict::Outcome::Terminate);
        CHECK(verdict.termination_reason == Termination::Stagnation);
    }
    SUBCASE("acceptance commits the round to memory") {
        ScriptedProvider provider({"OK", "CONTINUE"});
        RegulatorAgent regulator(task, cfg, prompts, provider);
        const std::size_t before = regulator.agent().memory().history.size();
        regulator.regulate(1, "transcript", "scores");
        CHECK(regulator.agent().memory().history.size() == before + 1);
    }
}

TEST_CASE("score parser accepts labeled lines") {
    CHECK(parse_score("persuadee: 0.35") == doctest::Approx(0.35));
    CHECK(parse_score("PERSUADER: 1") == 1.0);
    CHECK_THROWS_AS(parse_score("no score here"), AgentOutputError);
}

TEST_CASE("monitor verdict parser handles the spec vocabulary") {
    const auto flagged = parse_monitor_verdict(" FLAG: off_topic | discusses weather ");
    REQUIRE(flagged.flagged());
    CHECK(flagged.issues[0].kind == MonitorIssueKind::OffTopic);
    CHECK(flagged.issues[0].diagnosis == "discusses weather");
    CHECK_FALSE(parse_monitor_verdict("pass").flagged());
    CHECK_FALSE(parse_monitor_verdict("  PASS  ").flagged());
}

TEST_CASE("regulation verdict parser handles the spec vocabulary") {
    const auto terminate = parse_regulation_verdict("Terminate: agreement");
    CHECK(terminate.outcome == RegulationVerdict::Outcome::Terminate);
    CHECK(terminate.termination_reason == Termination::Agreement);

    CHECK(parse_regulation_verdict("ok").outcome == RegulationVerdict::Outcome::Continue);
    CHECK(parse_regulation_verdict("CONTINUE").outcome ==
          RegulationVerdict::Outcome::Continue);
    CHECK(parse_regulation_verdict("REVISE: needs work").feedback == "needs work");

    CHECK_THROWS_AS(parse_regulation_verdict("TERMINATE: max_rounds_cap"), AgentOutputError);
    CHECK_THROWS_AS(parse_regulation_verdict("TERMINATE: boredom"), AgentOutputError);
    CHECK_THROWS_AS(parse_regulation_verdict("REVISE:"), AgentOutputError);
}

TEST_CASE("parsers are total over arbitrary input") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<int> byte(32, 126);
    for (int i = 0; i < 2000; ++i) {
        std::string garbage;
        const int n = len(rng);
        for (int c = 0; c < n; ++c) garbage += static_cast<char>(byte(rng));
        try {
            (void)parse_monitor_verdict(garbage);
        } catch (const AgentOutputError&) {
        }
        try {
            (void)parse_regulation_verdict(garbage);
        } catch (const AgentOutputError&) {
        }
        try {
            (void)parse_score(garbage);
        } catch (const AgentOutputError&) {
        }
    }
}

TEST_CASE("memory never shrinks until reset, and reset empties it") {
    ScriptedProvider provider({"a", "b", "c"});
    Agent agent(AgentRole::Generator, "PERSUADER", AgentModel{"m", 0.0}, provider);
    agent.init("system");
    std::size_t last = agent.memory().history.size();
    for (int i = 0; i < 3; ++i) {
        agent.ask("turn " + std::to_string(i));
        CHECK(agent.memory().history.size() >= last);
        last = agent.memory().history.size();
    }
    agent.reset();
    CHECK(agent.memory().history.empty());
}
