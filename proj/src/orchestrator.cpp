#include "pf/orchestrator.hpp"

#include <json.hpp>

#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

namespace pf {
namespace {

std::string format_score(double v) { return nlohmann::json(v).dump(); }

std::string issues_text(const std::vector<MonitorIssue>& issues) {
    std::ostringstream out;
    for (std::size_t i = 0; i < issues.size(); ++i) {
        if (i) out << '\n';
        out << monitor_issue_kind_name(issues[i].kind);
        if (!issues[i].diagnosis.empty()) out << ": " << issues[i].diagnosis;
    }
    return out.str();
}

std::string transcript_of(const std::vector<Utterance>& utterances) {
    std::ostringstream out;
    for (std::size_t i = 0; i < utterances.size(); ++i) {
        if (i) out << '\n';
        out << speaker_label(utterances[i].speaker) << ": " << utterances[i].refined_text;
    }
    return out.str();
}

std::string scores_text_of(const std::map<SpeakerId, double>& scores) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [speaker, score] : scores) {
        if (!first) out << '\n';
        first = false;
        out << speaker_label(speaker) << ": " << format_score(score);
    }
    return out.str();
}

// One dialogue worker: all agents and loop state confined to this object.
class DialogueWorker {
  public:
    DialogueWorker(const PersuasionTask& task, const RunConfig& cfg, Provider& provider,
                   const PromptLibrary& prompts)
        : task_(task), cfg_(cfg), provider_(provider), prompts_(prompts) {
        order_ = speaker_order(cfg);
        for (const SpeakerId& s : order_) {
            generators_.emplace_back(s, task, cfg, prompts, provider);
        }
        monitor_ = std::make_unique<MonitorAgent>(task, cfg, prompts, provider, kFormatRetries);
        refiner_ = std::make_unique<RefinerAgent>(task, cfg, prompts, provider);
        annotator_ =
            std::make_unique<AnnotatorAgent>(task, cfg, prompts, provider, kFormatRetries);
        regulator_ =
            std::make_unique<RegulatorAgent>(task, cfg, prompts, provider, kFormatRetries);
    }

    Dialogue run() {
        try {
            return run_inner();
        } catch (const ProviderError& e) {
            throw GenerationError(task_.task_id,
                                  provider_error_kind_name(e.kind()) +
                                      (e.agent().empty() ? "" : " (" + e.agent() + ")") + ": " +
                                      e.what(),
                                  state_.rounds);
        } catch (const AgentOutputError& e) {
            throw GenerationError(task_.task_id,
                                  std::string("unparseable_agent_output: ") + e.what(),
                                  state_.rounds);
        }
    }

  private:
    // Upheld orchestrator decision: one format reminder per misformatted
    // reply; a second failure aborts the dialogue.
    static constexpr unsigned kFormatRetries = 1;

    Dialogue run_inner() {
        state_.rng_seed = cfg_.seed;
        Termination termination = Termination::MaxRoundsCap;

        for (state_.current_round = 1; state_.current_round <= cfg_.max_rounds;
             ++state_.current_round) {
            Round round = produce_round();
            RegulationVerdict decision = regulate_round(round);
            state_.rounds.push_back(std::move(round));
            if (decision.outcome == RegulationVerdict::Outcome::Terminate) {
                termination = *decision.termination_reason;
                break;
            }
        }

        reset_all_agents();

        Dialogue d;
        d.task = task_;
        d.rounds = std::move(state_.rounds);
        d.termination = termination;
        for (const auto& [speaker, directive] : cfg_.strategy_directive) {
            d.strategy_directive[speaker] = strategy_directive_sentence(directive);
        }
        d.config_snapshot = cfg_;
        d.seed = cfg_.seed;
        return d;
    }

    Round produce_round() {
        state_.pending.clear();
        for (std::size_t pos = 0; pos < order_.size(); ++pos) {
            state_.pending.push_back(produce_utterance(pos, std::nullopt));
        }

        Round round;
        round.utterances = state_.pending;
        state_.round_revisions = 0;
        return round;
    }

    RegulationVerdict regulate_round(Round& round) {
        for (;;) {
            const std::string transcript = transcript_of(round.utterances);
            round.scores = annotator_->annotate_round(state_.current_round, transcript, order_);

            RegulationVerdict review = regulator_->review_round(
                state_.current_round, transcript, scores_text_of(round.scores));
            if (review.outcome == RegulationVerdict::Outcome::Revise &&
                state_.round_revisions < cfg_.revision_cap) {
                ++state_.round_revisions;
                regenerate_round(round, review.feedback);
                continue;
            }
            // Accepted, or the revision budget ran out: the round stands.
            regulator_->accept_round(state_.current_round, transcript);
            return regulator_->decide_continuation();
        }
    }

    // The regulator rejected the round: every speaker revises its own
    // utterance with the feedback, each revision passing monitor + refine.
    void regenerate_round(Round& round, const std::string& feedback) {
        rebuild_monitor_memory();
        std::vector<Utterance> revised;
        for (std::size_t pos = 0; pos < order_.size(); ++pos) {
            revised.push_back(produce_utterance(pos, feedback));
        }
        round.utterances = std::move(revised);
        state_.pending = round.utterances;
    }

    // The monitor's stored history must describe the current dialogue, so a
    // replaced round's entries are dropped before regeneration. The monitor
    // reviews raw utterances, so raw text is what it remembers.
    void rebuild_monitor_memory() {
        monitor_ = std::make_unique<MonitorAgent>(task_, cfg_, prompts_, provider_,
                                                  kFormatRetries);
        for (const Round& r : state_.rounds) {
            for (const Utterance& u : r.utterances) {
                monitor_->store(u.speaker, u.raw_text);
            }
        }
    }

    Utterance produce_utterance(std::size_t position,
                                const std::optional<std::string>& regulator_feedback) {
        GeneratorAgent& gen = generators_[position];
        std::string raw;
        if (regulator_feedback) {
            raw = gen.revise_for_regulator(*regulator_feedback);
        } else if (state_.current_round == 1 && position == 0) {
            raw = gen.open();
        } else {
            raw = gen.respond(relay_for(position));
        }

        Utterance utter;
        utter.speaker = order_[position];

        // Monitor loop: each flagged check adds its issues; at most
        // revision_cap revisions, then the last attempt is accepted as-is.
        MonitorVerdict verdict = monitor_->check(utter.speaker, raw);
        while (verdict.flagged()) {
            utter.monitor_flags.insert(utter.monitor_flags.end(), verdict.issues.begin(),
                                       verdict.issues.end());
            if (utter.revision_count >= cfg_.revision_cap) {
                monitor_->store(utter.speaker, raw);
                break;
            }
            ++utter.revision_count;
            raw = gen.revise_for_monitor(issues_text(verdict.issues));
            verdict = monitor_->check(utter.speaker, raw);
        }

        utter.raw_text = raw;
        utter.refined_text = refiner_->refine(raw);
        utter.final_text = utter.refined_text;
        return utter;
    }

    // Everything said since this speaker's previous turn, in order: the tail
    // of the previous round plus the current round so far. Always refined
    // text, never raw.
    std::string relay_for(std::size_t position) const {
        std::vector<const Utterance*> delta;
        if (!state_.rounds.empty()) {
            const Round& prev = state_.rounds.back();
            for (std::size_t i = position + 1; i < prev.utterances.size(); ++i) {
                delta.push_back(&prev.utterances[i]);
            }
        }
        for (std::size_t i = 0; i < position && i < state_.pending.size(); ++i) {
            delta.push_back(&state_.pending[i]);
        }

        if (delta.size() == 1 && cfg_.n_persuaders == 1) {
            return delta.front()->refined_text;  // two-party: the bare counterpart text
        }
        std::ostringstream out;
        for (std::size_t i = 0; i < delta.size(); ++i) {
            if (i) out << "\n\n";
            out << speaker_label(delta[i]->speaker) << ": " << delta[i]->refined_text;
        }
        return out.str();
    }

    void reset_all_agents() {
        for (GeneratorAgent& g : generators_) g.reset();
        monitor_->reset();
        refiner_->reset();
        annotator_->reset();
        regulator_->reset();
    }

    PersuasionTask task_;
    RunConfig cfg_;
    Provider& provider_;
    const PromptLibrary& prompts_;
    std::vector<SpeakerId> order_;
    std::vector<GeneratorAgent> generators_;
    std::unique_ptr<MonitorAgent> monitor_;
    std::unique_ptr<RefinerAgent> refiner_;
    std::unique_ptr<AnnotatorAgent> annotator_;
    std::unique_ptr<RegulatorAgent> regulator_;
    GenerationState state_;
};

void validate_config(const RunConfig& cfg) {
    if (cfg.max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
    if (cfg.revision_cap < 1) throw std::invalid_argument("revision_cap must be >= 1");
    if (cfg.n_persuaders < 1) throw std::invalid_argument("n_persuaders must be >= 1");
}

}  // namespace

std::vector<SpeakerId> speaker_order(const RunConfig& cfg) {
    std::vector<SpeakerId> order;
    for (std::size_t i = 0; i < cfg.n_persuaders; ++i) {
        order.push_back(SpeakerId{Role::Persuader, i});
    }
    order.push_back(SpeakerId{Role::Persuadee, 0});
    return order;
}

Dialogue generate_dialogue(const PersuasionTask& task, const RunConfig& cfg, Provider& provider,
                           const PromptLibrary& prompts) {
    validate_config(cfg);
    DialogueWorker worker(task, cfg, provider, prompts);
    return worker.run();
}

RunConfig apply_strategy_control(const RunConfig& cfg, const SpeakerId& speaker,
                                 StrategyDirective directive) {
    const bool known = speaker.role == Role::Persuadee
                           ? speaker.index == 0
                           : speaker.index < cfg.n_persuaders;
    if (!known) {
        throw std::invalid_argument("unknown speaker: " + speaker_label(speaker));
    }
    RunConfig out = cfg;
    out.strategy_directive[speaker] = directive;
    return out;
}

RunConfig configure_multi_party(const RunConfig& cfg, std::size_t n_persuaders) {
    if (n_persuaders < 2) {
        throw std::invalid_argument("multi-party mode needs n_persuaders >= 2");
    }
    RunConfig out = cfg;
    out.n_persuaders = n_persuaders;
    return out;
}

BatchResult generate_batch(const std::vector<PersuasionTask>& tasks, const RunConfig& cfg,
                           const ProviderFactory& provider_factory, std::size_t parallelism,
                           const PromptLibrary& prompts, const BatchCallback& on_complete) {
    if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
    validate_config(cfg);

    std::vector<std::optional<Dialogue>> slots(tasks.size());
    std::vector<std::optional<BatchFailure>> failures(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex callback_mutex;

    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            RunConfig task_cfg = cfg;
            task_cfg.seed = cfg.seed + static_cast<long long>(i);
            try {
                std::shared_ptr<Provider> provider = provider_factory(tasks[i], i);
                Dialogue d = generate_dialogue(tasks[i], task_cfg, *provider, prompts);
                if (on_complete) {
                    std::lock_guard<std::mutex> lock(callback_mutex);
                    on_complete(i, d);
                }
                slots[i] = std::move(d);
            } catch (const GenerationError& e) {
                failures[i] = BatchFailure{e.task_id(), e.reason()};
            } catch (const std::exception& e) {
                failures[i] = BatchFailure{tasks[i].task_id, e.what()};
            }
        }
    };

    const std::size_t n_workers = std::min(parallelism, tasks.size());
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(work);
        for (std::thread& t : workers) t.join();
    }

    BatchResult result;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (slots[i]) result.dialogues.push_back(std::move(*slots[i]));
        if (failures[i]) result.failures.push_back(std::move(*failures[i]));
    }
    return result;
}

BatchResult generate_batch(const std::vector<PersuasionTask>& tasks, const RunConfig& cfg,
                           Provider& provider, std::size_t parallelism,
                           const PromptLibrary& prompts, const BatchCallback& on_complete) {
    std::shared_ptr<Provider> shared(&provider, [](Provider*) {});
    return generate_batch(
        tasks, cfg, [shared](const PersuasionTask&, std::size_t) { return shared; },
        parallelism, prompts, on_complete);
}

}  // namespace pf
