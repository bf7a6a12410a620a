#include "pf/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pf/serialize.hpp"

namespace pf {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Confusion matrix over category indices; shared by both kappa variants.
struct Confusion {
    std::size_t k = 0;
    std::vector<double> cells;  // k*k counts, row = rater a, col = rater b
    std::vector<double> row;    // rater a marginals
    std::vector<double> col;    // rater b marginals
    double n = 0.0;

    double at(std::size_t i, std::size_t j) const { return cells[i * k + j]; }
};

Confusion build_confusion(const std::vector<int>& a, const std::vector<int>& b,
                          const std::vector<int>& categories) {
    if (a.size() != b.size()) {
        throw MetricsError(MetricsError::Kind::LengthMismatch,
                           "rating series differ in length: " + std::to_string(a.size()) +
                               " vs " + std::to_string(b.size()));
    }
    if (a.empty()) {
        throw MetricsError(MetricsError::Kind::EmptyInput, "rating series are empty");
    }
    if (categories.empty()) {
        throw MetricsError(MetricsError::Kind::DegenerateCategories, "empty category set");
    }
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < categories.size(); ++i) index[categories[i]] = i;
    if (index.size() != categories.size()) {
        throw MetricsError(MetricsError::Kind::DegenerateCategories,
                           "category set contains duplicates");
    }

    Confusion c;
    c.k = categories.size();
    c.cells.assign(c.k * c.k, 0.0);
    c.row.assign(c.k, 0.0);
    c.col.assign(c.k, 0.0);
    c.n = static_cast<double>(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
        auto ia = index.find(a[t]);
        auto ib = index.find(b[t]);
        if (ia == index.end() || ib == index.end()) {
            throw MetricsError(MetricsError::Kind::BadCategory,
                               "value outside declared category set at position " +
                                   std::to_string(t));
        }
        c.cells[ia->second * c.k + ib->second] += 1.0;
        c.row[ia->second] += 1.0;
        c.col[ib->second] += 1.0;
    }
    return c;
}

}  // namespace

double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b,
                   const std::vector<int>& categories, bool* degenerate) {
    if (degenerate) *degenerate = false;
    const Confusion c = build_confusion(a, b, categories);

    // kappa = (p_o - p_e)/(1 - p_e), evaluated over integer counts so the
    // one division is the only rounding step:
    //   (N * sum_i C_ii - sum_i R_i*S_i) / (N^2 - sum_i R_i*S_i)
    double sum_diag = 0.0;
    double sum_marg = 0.0;
    for (std::size_t i = 0; i < c.k; ++i) {
        sum_diag += c.at(i, i);
        sum_marg += c.row[i] * c.col[i];
    }
    const double den = c.n * c.n - sum_marg;
    if (den == 0.0) {
        // Both raters used one identical category everywhere; p_o = p_e = 1
        // and the 0/0 form resolves to perfect agreement.
        if (degenerate) *degenerate = true;
        return 1.0;
    }
    return (c.n * sum_diag - sum_marg) / den;
}

double weighted_kappa_linear(const std::vector<int>& a, const std::vector<int>& b,
                             const std::vector<int>& categories, bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (categories.size() < 2) {
        throw MetricsError(MetricsError::Kind::DegenerateCategories,
                           "linear weights need at least 2 ordered categories");
    }
    const Confusion c = build_confusion(a, b, categories);
    const double k1 = static_cast<double>(c.k - 1);

    // Same integer-count evaluation as cohen_kappa, with the linear weights
    // scaled to integers: w'_ij = (k-1) - |i-j|.
    double sum_o = 0.0;
    double sum_e = 0.0;
    for (std::size_t i = 0; i < c.k; ++i) {
        for (std::size_t j = 0; j < c.k; ++j) {
            const double w =
                k1 - std::abs(static_cast<double>(i) - static_cast<double>(j));
            sum_o += w * c.at(i, j);
            sum_e += w * c.row[i] * c.col[j];
        }
    }
    const double den = c.n * c.n * k1 - sum_e;
    if (den == 0.0) {
        if (degenerate) *degenerate = true;
        return 1.0;
    }
    return (c.n * sum_o - sum_e) / den;
}

bool StrategyDistribution::all_zero() const {
    return std::all_of(proportions.begin(), proportions.end(),
                       [](double v) { return v == 0.0; });
}

StrategyDistribution strategy_distribution(const std::vector<StrategyTag>& tags) {
    StrategyDistribution dist;
    if (tags.empty()) return dist;
    for (StrategyTag tag : tags) {
        dist.proportions[static_cast<std::size_t>(canonical_strategy_index(tag))] += 1.0;
    }
    const double total = static_cast<double>(tags.size());
    for (double& p : dist.proportions) p /= total;
    return dist;
}

double cosine_similarity(const StrategyDistribution& u, const StrategyDistribution& v) {
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < kStrategyCount; ++i) {
        dot += u.proportions[i] * v.proportions[i];
        nu += u.proportions[i] * u.proportions[i];
        nv += v.proportions[i] * v.proportions[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw MetricsError(MetricsError::Kind::ZeroVector,
                           "cosine similarity of an all-zero distribution");
    }
    const double value = dot / std::sqrt(nu * nv);
    return std::clamp(value, 0.0, 1.0);
}

std::vector<std::vector<double>> similarity_matrix(
    const std::vector<StrategyDistribution>& distributions) {
    for (std::size_t i = 0; i < distributions.size(); ++i) {
        if (distributions[i].all_zero()) {
            throw MetricsError(MetricsError::Kind::ZeroVector,
                               "all-zero distribution at index " + std::to_string(i));
        }
    }
    const std::size_t n = distributions.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = cosine_similarity(distributions[i], distributions[j]);
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    return m;
}

DifferentiationStats differentiation_stats(const std::vector<DifferentiationRecord>& records) {
    if (records.empty()) {
        throw MetricsError(MetricsError::Kind::EmptyInput, "no differentiation records");
    }
    double both_correct = 0.0;
    double both_wrong = 0.0;
    double disagree = 0.0;
    for (const auto& r : records) {
        if (r.annotator_a_correct && r.annotator_b_correct) {
            both_correct += 1.0;
        } else if (!r.annotator_a_correct && !r.annotator_b_correct) {
            both_wrong += 1.0;
        } else {
            disagree += 1.0;
        }
    }
    const double n = static_cast<double>(records.size());
    DifferentiationStats stats;
    stats.both_correct = both_correct / n;
    stats.disagree = disagree / n;
    stats.both_wrong = both_wrong / n;
    return stats;
}

std::vector<double> annotator_accuracy(const std::vector<std::vector<bool>>& per_annotator) {
    std::vector<double> out;
    out.reserve(per_annotator.size());
    for (std::size_t i = 0; i < per_annotator.size(); ++i) {
        if (per_annotator[i].empty()) {
            throw MetricsError(MetricsError::Kind::EmptyInput,
                               "annotator " + std::to_string(i) + " has no trials");
        }
        double correct = 0.0;
        for (bool b : per_annotator[i]) correct += b ? 1.0 : 0.0;
        out.push_back(correct / static_cast<double>(per_annotator[i].size()));
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

bool parse_bool_field(const std::string& s, std::size_t lineno) {
    std::string t = trim(s);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ParseError("not a boolean: " + s, lineno);
}

}  // namespace

std::vector<RatingRow> load_ratings_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open ratings file: " + path);
    std::vector<RatingRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (lineno == 1 && !fields.empty() && fields[0] == "item_id") continue;  // header
        if (fields.size() != 3) {
            throw ParseError("expected item_id,annotator,value", lineno);
        }
        RatingRow row;
        row.item_id = fields[0];
        row.annotator = fields[1];
        try {
            row.value = std::stoi(fields[2]);
        } catch (const std::exception&) {
            throw ParseError("value is not an integer: " + fields[2], lineno);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::pair<std::vector<int>, std::vector<int>> paired_series(const std::vector<RatingRow>& a,
                                                            const std::vector<RatingRow>& b) {
    std::map<std::string, int> b_by_item;
    for (const RatingRow& row : b) {
        if (!b_by_item.emplace(row.item_id, row.value).second) {
            throw MetricsError(MetricsError::Kind::LengthMismatch,
                               "duplicate item_id in second series: " + row.item_id);
        }
    }
    std::vector<int> va;
    std::vector<int> vb;
    std::map<std::string, bool> seen;
    for (const RatingRow& row : a) {
        if (!seen.emplace(row.item_id, true).second) {
            throw MetricsError(MetricsError::Kind::LengthMismatch,
                               "duplicate item_id in first series: " + row.item_id);
        }
        auto it = b_by_item.find(row.item_id);
        if (it == b_by_item.end()) {
            throw MetricsError(MetricsError::Kind::LengthMismatch,
                               "item missing from second series: " + row.item_id);
        }
        va.push_back(row.value);
        vb.push_back(it->second);
    }
    if (seen.size() != b_by_item.size()) {
        throw MetricsError(MetricsError::Kind::LengthMismatch,
                           "second series has items the first lacks");
    }
    return {std::move(va), std::move(vb)};
}

std::vector<TagRecord> load_tags_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tags file: " + path);
    std::vector<TagRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            TagRecord record;
            record.dialogue_id = j.at("dialogue_id").get<std::string>();
            record.round = j.at("round").get<std::size_t>();
            record.speaker = j.at("speaker").get<std::string>();
            for (const auto& name : j.at("tags")) {
                auto tag = parse_strategy_tag(name.get<std::string>());
                if (!tag) {
                    throw std::runtime_error("unknown strategy name: " +
                                             name.get<std::string>());
                }
                record.tags.push_back(*tag);
            }
            records.push_back(std::move(record));
        } catch (const std::exception& e) {
            throw ParseError(std::string("tags record: ") + e.what(), lineno);
        }
    }
    return records;
}

std::pair<std::vector<std::string>, std::vector<StrategyDistribution>> group_distributions(
    const std::vector<TagRecord>& records) {
    std::vector<std::string> ids;
    std::map<std::string, std::vector<StrategyTag>> tags_by_dialogue;
    for (const TagRecord& r : records) {
        auto [it, inserted] = tags_by_dialogue.try_emplace(r.dialogue_id);
        if (inserted) ids.push_back(r.dialogue_id);
        it->second.insert(it->second.end(), r.tags.begin(), r.tags.end());
    }
    std::vector<StrategyDistribution> dists;
    dists.reserve(ids.size());
    for (const std::string& id : ids) {
        dists.push_back(strategy_distribution(tags_by_dialogue[id]));
    }
    return {std::move(ids), std::move(dists)};
}

void save_matrix_csv(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<std::vector<double>>& matrix) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write matrix file: " + path);
    out << "# columns:";
    for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : " ") << ids[i];
    out << '\n';
    for (const auto& row : matrix) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            out << nlohmann::json(row[j]).dump();
        }
        out << '\n';
    }
}

std::vector<DifferentiationRecord> load_differentiation_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open records file: " + path);
    std::vector<DifferentiationRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (lineno == 1 && !fields.empty() && fields[0] == "pair_id") continue;  // header
        if (fields.size() != 3) {
            throw ParseError("expected pair_id,annotator_a_correct,annotator_b_correct",
                             lineno);
        }
        DifferentiationRecord record;
        record.pair_id = fields[0];
        record.annotator_a_correct = parse_bool_field(fields[1], lineno);
        record.annotator_b_correct = parse_bool_field(fields[2], lineno);
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace pf
