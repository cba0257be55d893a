#pragma once

#include <vector>

#include "shapfed/data.hpp"
#include "shapfed/model.hpp"

namespace shapfed {

struct EvalReport {
    std::vector<double> per_class_acc;  // recall per class; 0 for classes absent from data
    double balanced_acc = 0.0;          // mean recall over classes present in data
    int n_eval = 0;
};

// Argmax-of-logits prediction (ties go to the lowest class index).
EvalReport evaluate(const ParamVector& params, const ModelSpec& spec, const Dataset& data);

struct PearsonResult {
    double r = 0.0;
    bool degenerate = false;  // set when either input has (numerically) zero variance
};

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace shapfed
