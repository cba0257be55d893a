#pragma once

#include <string>
#include <vector>

#include "shapfed/federation.hpp"

namespace shapfed {

// Result exporters. CSV uses '.' decimals, ',' delimiters, a header row and
// 17-significant-digit floats; JSON matrices are row-major arrays-of-arrays
// with explicit participant and class label arrays.

void write_metrics_csv(const std::string& path, const RunLog& log);

void write_gamma_json(const std::string& path, const std::vector<std::vector<double>>& gamma);

struct FairnessRow {
    std::string strategy;
    double pearson_r = 0.0;
    bool degenerate = false;
};
void write_fairness_csv(const std::string& path, const std::vector<FairnessRow>& rows);

void write_partition_csv(const std::string& path,
                         const std::vector<std::vector<long long>>& class_counts);

struct AuditResult {
    int n = 0;
    int num_classes = 0;
    std::vector<std::vector<double>> exact_shapley;  // n x M
    std::vector<std::vector<double>> cssv;           // n x M (final smoothed)
    std::vector<double> cgsv;                        // n
    long long exact_utility_calls = 0;
    long long approx_utility_calls = 0;  // n + 1
    std::vector<int> top_exact;          // per class
    std::vector<int> top_cssv;
    int top_cgsv = 0;
    std::vector<bool> cssv_agreement;  // per class, top_exact == top_cssv
    std::vector<bool> cgsv_agreement;
};
void write_audit_json(const std::string& path, const AuditResult& audit);

}  // namespace shapfed
