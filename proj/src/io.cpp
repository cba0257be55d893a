#include "shapfed/io.hpp"

#include <fstream>

#include <json.hpp>

namespace shapfed {
namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    return out;
}

nlohmann::json index_labels(std::size_t count) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < count; ++i) arr.push_back(i);
    return arr;
}

}  // namespace

void write_metrics_csv(const std::string& path, const RunLog& log) {
    auto out = open_out(path);
    const std::size_t n = log.rounds.empty() ? 0 : log.rounds.front().gamma.size();
    out << "t,global_balanced_acc";
    for (std::size_t i = 0; i < n; ++i) out << ",acc_p" << i;
    for (std::size_t i = 0; i < n; ++i) out << ",gamma_p" << i;
    for (std::size_t i = 0; i < n; ++i) out << ",gamma_tilde_p" << i;
    out << "\n";
    for (const auto& rec : log.rounds) {
        out << rec.t << "," << format_double(rec.global_balanced_acc);
        for (double v : rec.participant_balanced_acc) out << "," << format_double(v);
        for (double v : rec.gamma) out << "," << format_double(v);
        for (double v : rec.gamma_tilde) out << "," << format_double(v);
        out << "\n";
    }
}

void write_gamma_json(const std::string& path, const std::vector<std::vector<double>>& gamma) {
    nlohmann::json j;
    j["participants"] = index_labels(gamma.size());
    j["classes"] = index_labels(gamma.empty() ? 0 : gamma.front().size());
    j["gamma"] = gamma;
    open_out(path) << j.dump(2) << "\n";
}

void write_fairness_csv(const std::string& path, const std::vector<FairnessRow>& rows) {
    auto out = open_out(path);
    out << "strategy,pearson_r,degenerate\n";
    for (const auto& row : rows) {
        out << row.strategy << "," << format_double(row.pearson_r) << ","
            << (row.degenerate ? 1 : 0) << "\n";
    }
}

void write_partition_csv(const std::string& path,
                         const std::vector<std::vector<long long>>& class_counts) {
    auto out = open_out(path);
    const std::size_t m = class_counts.empty() ? 0 : class_counts.front().size();
    out << "participant";
    for (std::size_t j = 0; j < m; ++j) out << ",class_" << j;
    out << "\n";
    for (std::size_t i = 0; i < class_counts.size(); ++i) {
        out << i;
        for (long long c : class_counts[i]) out << "," << c;
        out << "\n";
    }
}

void write_audit_json(const std::string& path, const AuditResult& audit) {
    nlohmann::json j;
    j["n"] = audit.n;
    j["num_classes"] = audit.num_classes;
    j["participants"] = index_labels(static_cast<std::size_t>(audit.n));
    j["classes"] = index_labels(static_cast<std::size_t>(audit.num_classes));
    j["exact_shapley"] = audit.exact_shapley;
    j["cssv"] = audit.cssv;
    j["cgsv"] = audit.cgsv;
    j["utility_calls"]["exact"] = audit.exact_utility_calls;
    j["utility_calls"]["approx"] = audit.approx_utility_calls;
    j["top_contributor"]["exact"] = audit.top_exact;
    j["top_contributor"]["cssv"] = audit.top_cssv;
    j["top_contributor"]["cgsv"] = audit.top_cgsv;
    int cssv_count = 0, cgsv_count = 0;
    nlohmann::json cssv_arr = nlohmann::json::array(), cgsv_arr = nlohmann::json::array();
    for (bool b : audit.cssv_agreement) {
        cssv_arr.push_back(b);
        cssv_count += b ? 1 : 0;
    }
    for (bool b : audit.cgsv_agreement) {
        cgsv_arr.push_back(b);
        cgsv_count += b ? 1 : 0;
    }
    j["agreement"]["cssv"] = cssv_arr;
    j["agreement"]["cssv_count"] = cssv_count;
    j["agreement"]["cgsv"] = cgsv_arr;
    j["agreement"]["cgsv_count"] = cgsv_count;
    open_out(path) << j.dump(2) << "\n";
}

}  // namespace shapfed
