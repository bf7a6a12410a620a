#pragma once
// Quantitative evaluation machinery: inter-rater agreement, strategy
// distributions, similarity matrices, differentiation-task statistics.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "pf/core.hpp"

namespace pf {

class MetricsError : public std::runtime_error {
  public:
    enum class Kind {
        LengthMismatch,
        EmptyInput,
        BadCategory,
        DegenerateCategories,
        ZeroVector,
    };

    MetricsError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

// Cohen's kappa over a declared ordered category set. The set is explicit
// rather than inferred so absent categories still shape the marginals
// consistently across item-level kappas.
//
// kappa = (p_o - p_e) / (1 - p_e). When both raters use one identical
// category everywhere (p_o = p_e = 1) the 0/0 form returns 1.0 and
// `degenerate`, when provided, is set.
double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b,
                   const std::vector<int>& categories, bool* degenerate = nullptr);

// Linearly weighted variant: w_ij = 1 - |i-j|/(k-1) over the k ordered
// categories. Needs k >= 2.
double weighted_kappa_linear(const std::vector<int>& a, const std::vector<int>& b,
                             const std::vector<int>& categories, bool* degenerate = nullptr);

// 9-component proportion vector in canonical StrategyTag order; components
// sum to 1 (within 1e-9) or the vector is all-zero.
struct StrategyDistribution {
    std::array<double, kStrategyCount> proportions{};

    bool all_zero() const;
    friend bool operator==(const StrategyDistribution&, const StrategyDistribution&) = default;
};

StrategyDistribution strategy_distribution(const std::vector<StrategyTag>& tags);

// dot(u,v)/(|u||v|), in [0,1] for non-negative components. Errors when
// either vector is all-zero.
double cosine_similarity(const StrategyDistribution& u, const StrategyDistribution& v);

// Symmetric, unit-diagonal matrix of pairwise cosine similarities; row and
// column order follows the input order.
std::vector<std::vector<double>> similarity_matrix(
    const std::vector<StrategyDistribution>& distributions);

struct DifferentiationRecord {
    std::string pair_id;
    bool annotator_a_correct = false;
    bool annotator_b_correct = false;
};

struct DifferentiationStats {
    double both_correct = 0.0;
    double disagree = 0.0;
    double both_wrong = 0.0;
    double random_baseline = 0.25;  // chance of both raters guessing right
};

DifferentiationStats differentiation_stats(const std::vector<DifferentiationRecord>& records);

// Per-annotator fraction correct.
std::vector<double> annotator_accuracy(const std::vector<std::vector<bool>>& per_annotator);

// ---- File formats -------------------------------------------------------

// Ratings CSV: header "item_id,annotator,value".
struct RatingRow {
    std::string item_id;
    std::string annotator;
    int value = 0;
};

std::vector<RatingRow> load_ratings_csv(const std::string& path);

// Aligns two rating files into paired series ordered by the first file's
// rows; both must cover exactly the same item set.
std::pair<std::vector<int>, std::vector<int>> paired_series(const std::vector<RatingRow>& a,
                                                            const std::vector<RatingRow>& b);

// Tags JSONL: one record per utterance,
// {dialogue_id, round, speaker, tags:[strategy names]}.
struct TagRecord {
    std::string dialogue_id;
    std::size_t round = 0;
    std::string speaker;
    std::vector<StrategyTag> tags;
};

std::vector<TagRecord> load_tags_jsonl(const std::string& path);

// Per-dialogue distributions in order of first appearance.
std::pair<std::vector<std::string>, std::vector<StrategyDistribution>> group_distributions(
    const std::vector<TagRecord>& records);

// Matrix CSV with a sidecar header line ("# columns: id1,id2,...").
void save_matrix_csv(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<std::vector<double>>& matrix);

// Differentiation records CSV: header
// "pair_id,annotator_a_correct,annotator_b_correct" with true/false or 1/0.
std::vector<DifferentiationRecord> load_differentiation_csv(const std::string& path);

}  // namespace pf
