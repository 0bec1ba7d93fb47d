#include "cliredact/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "cliredact/errors.hpp"

namespace cliredact {

double fbeta_score(double precision, double recall, double beta) {
    if (precision + recall == 0.0) return 0.0;
    const double b2 = beta * beta;
    return (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

namespace {

void check_lengths(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw ShapeError("scores and labels must have the same length");
    }
    if (scores.empty()) {
        throw EvalError("cannot evaluate an empty score set");
    }
}

std::size_t count_positives(const std::vector<int>& labels) {
    std::size_t p = 0;
    for (int label : labels) p += label != 0 ? 1 : 0;
    return p;
}

EvalPoint point_at(double threshold, std::size_t tp, std::size_t fp, std::size_t positives,
                   double beta) {
    EvalPoint pt;
    pt.threshold = threshold;
    const std::size_t predicted = tp + fp;
    pt.precision = predicted == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    pt.recall = static_cast<double>(tp) / static_cast<double>(positives);
    pt.fbeta = fbeta_score(pt.precision, pt.recall, beta);
    return pt;
}

}  // namespace

SweepResult sweep(const std::vector<double>& scores, const std::vector<int>& labels,
                  const MetricConfig& config) {
    check_lengths(scores, labels);
    const std::size_t positives = count_positives(labels);
    if (positives == 0) {
        throw EvalError("threshold sweep needs at least one positive label");
    }

    // Sort by descending score; walking down the order adds predictions one
    // threshold at a time.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    std::vector<double> thresholds;
    thresholds.push_back(1.0 + 1e-9);
    for (std::size_t i : order) {
        if (thresholds.back() != scores[i]) thresholds.push_back(scores[i]);
    }
    if (thresholds.back() != 0.0) thresholds.push_back(0.0);

    SweepResult result;
    result.curve.reserve(thresholds.size());
    std::size_t tp = 0, fp = 0, consumed = 0;
    for (double threshold : thresholds) {
        while (consumed < order.size() && scores[order[consumed]] >= threshold) {
            if (labels[order[consumed]] != 0) {
                ++tp;
            } else {
                ++fp;
            }
            ++consumed;
        }
        result.curve.push_back(point_at(threshold, tp, fp, positives, config.beta));
    }

    // Curve was built in descending threshold order; expose it ascending.
    std::reverse(result.curve.begin(), result.curve.end());

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.curve.size(); ++i) {
        const EvalPoint& cand = result.curve[i];
        const EvalPoint& cur = result.curve[best];
        if (cand.fbeta > cur.fbeta ||
            (cand.fbeta == cur.fbeta && cand.recall > cur.recall) ||
            (cand.fbeta == cur.fbeta && cand.recall == cur.recall &&
             cand.threshold < cur.threshold)) {
            best = i;
        }
    }
    result.max_point = result.curve[best];

    const double floor = result.max_point.fbeta * 0.99;
    std::size_t lo = best, hi = best;
    while (lo > 0 && result.curve[lo - 1].fbeta >= floor) --lo;
    while (hi + 1 < result.curve.size() && result.curve[hi + 1].fbeta >= floor) ++hi;
    result.plateau_width = result.curve[hi].threshold - result.curve[lo].threshold;
    return result;
}

double threshold_at_recall(const std::vector<double>& scores, const std::vector<int>& labels,
                           double recall_floor) {
    check_lengths(scores, labels);
    const std::size_t positives = count_positives(labels);
    if (positives == 0) {
        throw EvalError("threshold_at_recall needs at least one positive label");
    }
    const double max_score = *std::max_element(scores.begin(), scores.end());
    if (recall_floor <= 0.0) {
        // Degenerate floor: an empty prediction set has recall 0 and, by
        // convention, precision 1, so any threshold above the max satisfies it.
        return max_score + 1.0;
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    std::size_t tp = 0, consumed = 0;
    double best = 0.0;
    bool found = false;
    // Candidate thresholds are the distinct scores, highest first; the first
    // one meeting the floor is the largest feasible threshold.
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (consumed < order.size() && scores[order[consumed]] >= threshold) {
            if (labels[order[consumed]] != 0) ++tp;
            ++consumed;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(positives);
        if (recall >= recall_floor) {
            best = threshold;
            found = true;
            break;
        }
        i = consumed;
    }
    if (!found) best = 0.0;  // threshold 0 predicts everything: recall 1
    return best;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores, labels);
    const std::size_t positives = count_positives(labels);
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw EvalError("AUC needs both classes present");
    }

    // Rank-sum formulation with midranks for ties.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] != 0) rank_sum_pos += midrank;
        }
        i = j + 1;
    }
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(negatives);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);
}

void write_curve_csv(const std::vector<EvalPoint>& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << "threshold,precision,recall,fbeta\n";
    char buf[160];
    for (const EvalPoint& pt : curve) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", pt.threshold, pt.precision,
                      pt.recall, pt.fbeta);
        out << buf;
    }
}

}  // namespace cliredact
