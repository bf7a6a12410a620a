#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "pf/provider.hpp"
#include "pf/serialize.hpp"
#include "support.hpp"

using namespace pf;

namespace {

ChatRequest simple_request(const std::string& text) {
    return ChatRequest{"test-model", 0.0, {ChatMessage{MessageRole::User, text}}};
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("scripted provider returns entries in order regardless of request") {
    ScriptedProvider provider({"a", "b"});
    CHECK(provider.complete(simple_request("anything")).content == "a");
    const auto second = provider.complete(simple_request("else"));
    CHECK(second.content == "b");
    CHECK(second.finish_reason == FinishReason::Stop);
}

TEST_CASE("scripted provider exhaustion is an error") {
    ScriptedProvider provider({"only"});
    provider.complete(simple_request("1"));
    try {
        provider.complete(simple_request("2"));
        FAIL("expected script_exhausted");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderError::Kind::ScriptExhausted);
    }
}

TEST_CASE("two identical scripts under identical call sequences give identical transcripts") {
    ScriptedProvider p1({"x", "y", "z"});
    ScriptedProvider p2({"x", "y", "z"});
    std::vector<std::string> t1, t2;
    for (int i = 0; i < 3; ++i) {
        const auto req = simple_request("call " + std::to_string(i));
        t1.push_back(p1.complete(req).content);
        t2.push_back(p2.complete(req).content);
    }
    CHECK(t1 == t2);
    CHECK(p1.requests() == p2.requests());
}

TEST_CASE("scripted provider can script refusal finishes") {
    auto provider = ScriptedProvider::from_entries({{"I refuse.", FinishReason::Refusal}});
    const auto response = provider.complete(simple_request("please"));
    CHECK(response.finish_reason == FinishReason::Refusal);
    CHECK(response.content == "I refuse.");
}

TEST_CASE("record over scripted then strict replay round-trips") {
    auto inner = std::make_shared<ScriptedProvider>(std::vector<std::string>{"x"});
    RecordingProvider recorder(inner);
    CHECK(recorder.complete(simple_request("q")).content == "x");

    ReplayProvider replay(recorder.cassette());
    CHECK(replay.complete(simple_request("q")).content == "x");
}

TEST_CASE("strict replay exhausts after the recorded exchanges") {
    auto inner = std::make_shared<ScriptedProvider>(std::vector<std::string>{"a", "b"});
    RecordingProvider recorder(inner);
    recorder.complete(simple_request("1"));
    recorder.complete(simple_request("2"));

    ReplayProvider replay(recorder.cassette());
    replay.complete(simple_request("1"));
    replay.complete(simple_request("2"));
    try {
        replay.complete(simple_request("3"));
        FAIL("expected cassette_exhausted");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderError::Kind::CassetteExhausted);
    }
}

TEST_CASE("hash-mode replay matches by request content") {
    Cassette cassette;
    cassette.match_mode = CassetteMatchMode::HashOfRequest;
    cassette.exchanges.push_back(
        ChatExchange{simple_request("known"), ChatResponse{"answer", FinishReason::Stop}});

    ReplayProvider replay(cassette);
    SUBCASE("a recorded request replays") {
        CHECK(replay.complete(simple_request("known")).content == "answer");
    }
    SUBCASE("an unseen request is a mismatch") {
        try {
            replay.complete(simple_request("never seen"));
            FAIL("expected cassette_mismatch");
        } catch (const ProviderError& e) {
            CHECK(e.kind() == ProviderError::Kind::CassetteMismatch);
        }
    }
    SUBCASE("a repeated request beyond its recordings exhausts") {
        replay.complete(simple_request("known"));
        try {
            replay.complete(simple_request("known"));
            FAIL("expected cassette_exhausted");
        } catch (const ProviderError& e) {
            CHECK(e.kind() == ProviderError::Kind::CassetteExhausted);
        }
    }
}

TEST_CASE("cassette files survive a save/load round trip") {
    auto inner = std::make_shared<ScriptedProvider>(
        pftest::two_round_agreement_script());
    RecordingProvider recorder(inner);
    for (int i = 0; i < 5; ++i) {
        recorder.complete(simple_request("call " + std::to_string(i)));
    }

    TempFile file("pf_cassette_roundtrip.jsonl");
    recorder.cassette().save(file.path);
    const Cassette loaded = Cassette::load(file.path);
    CHECK(loaded.exchanges == recorder.cassette().exchanges);
}

TEST_CASE("request hashing differs across contents and is stable") {
    const auto a = request_hash(simple_request("a"));
    const auto b = request_hash(simple_request("b"));
    CHECK(a != b);
    CHECK(a == request_hash(simple_request("a")));
}
