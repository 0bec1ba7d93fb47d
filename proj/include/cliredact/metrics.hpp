#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cliredact {

/// One operating point of a threshold sweep. Positive prediction is
/// score >= threshold (inclusive). Precision with zero predicted positives
/// is defined as 1; F-beta at precision = recall = 0 is defined as 0.
struct EvalPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double fbeta = 0.0;
};

struct MetricConfig {
    double beta = 5.0;
    double recall_floor = 0.99;
};

struct SweepResult {
    /// Dense curve in ascending threshold order: every distinct score plus
    /// sentinel thresholds 0 and 1 + epsilon.
    std::vector<EvalPoint> curve;
    EvalPoint max_point;
    /// Width of the contiguous threshold interval around the max whose
    /// F-beta stays within 1% of the maximum (plateau robustness).
    double plateau_width = 0.0;
};

/// (1 + beta^2) p r / (beta^2 p + r), 0 when p + r == 0.
double fbeta_score(double precision, double recall, double beta);

/// Evaluates every distinct score as a threshold plus the sentinels, and
/// returns the full curve with the best point. Ties on F-beta break toward
/// higher recall, then lower threshold. Throws when no positive labels.
SweepResult sweep(const std::vector<double>& scores, const std::vector<int>& labels,
                  const MetricConfig& config = {});

/// Largest threshold whose recall meets the floor (maximizing precision
/// subject to the recall constraint). A floor of 0 is satisfied by refusing
/// every prediction, so the result is a threshold above the max score.
double threshold_at_recall(const std::vector<double>& scores, const std::vector<int>& labels,
                           double recall_floor);

/// Probability that a random positive outscores a random negative, ties
/// counted half. Throws when either class is missing.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// CSV with header threshold,precision,recall,fbeta.
void write_curve_csv(const std::vector<EvalPoint>& curve, const std::string& path);

}  // namespace cliredact
