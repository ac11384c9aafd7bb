#ifndef BIOQA_NEURAL_HEADS_H_
#define BIOQA_NEURAL_HEADS_H_

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bioqa/model.h"

namespace bioqa {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Encoder output: one H-dimensional vector per sequence position. Position 0
// is the sequence-level ([CLS]) vector. provenance[i] holds the character
// range of context token i, unset for question and special tokens.
struct HiddenStates {
  Matrix values;
  std::vector<std::optional<CharRange>> provenance;

  std::size_t length() const { return values.rows(); }
  std::size_t hidden_size() const { return values.cols(); }
};

// Yes/no classifier on the [CLS] vector: P(yes) = sigmoid(C . M^T).
struct YesNoHead {
  std::vector<double> weights;  // M, 1 x H
  double bias = 0.0;
  bool use_bias = false;

  static YesNoHead Zero(std::size_t hidden_size) {
    return {std::vector<double>(hidden_size, 0.0), 0.0, false};
  }
};

// Span head M (2 x H): row 0 scores start positions, row 1 end positions.
struct SpanHead {
  Matrix weights;
  std::array<double, 2> bias{0.0, 0.0};
  bool use_bias = false;

  static SpanHead Zero(std::size_t hidden_size) {
    return {Matrix(2, hidden_size), {0.0, 0.0}, false};
  }
};

struct SpanPrediction {
  std::size_t start_index = 0;
  std::size_t end_index = 0;  // inclusive token index
  double score = 0.0;

  friend bool operator==(const SpanPrediction&, const SpanPrediction&) = default;
};

struct GoldSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
};

// Numerically stable logistic function.
double Sigmoid(double logit);

double YesLogit(std::span<const double> cls, const YesNoHead& head);
// Throws InvalidArgument on non-finite input or mismatched sizes.
double YesProbability(std::span<const double> cls, const YesNoHead& head);

// -(a log p + (1 - a) log(1 - p)); p must lie strictly inside (0, 1).
double BceLoss(double probability, bool label);
// Same loss evaluated from the logit as a softplus, exact for saturated
// probabilities.
double BceLossFromLogit(double logit, bool label);
// d loss / d logit = sigmoid(logit) - label.
double BceLogitGradient(double logit, bool label);

std::vector<double> LogSoftmax(std::span<const double> logits);

struct SpanDistributions {
  std::vector<double> start;
  std::vector<double> end;
  std::vector<double> log_start;
  std::vector<double> log_end;
};

// Two independent softmaxes over positions. Throws InvalidArgument on
// non-finite logits.
SpanDistributions ComputeSpanDistributions(const HiddenStates& hidden,
                                           const SpanHead& head);
SpanDistributions SpanDistributionsFromLogits(std::span<const double> start,
                                              std::span<const double> end);

// Mean over the batch of -log P_start[a_s] and of -log P_end[a_e], averaged.
// Throws InvalidArgument when a gold index is out of range or start > end.
double SpanLoss(std::span<const SpanDistributions> batch,
                std::span<const GoldSpan> gold);

// Loss of one example and its gradient. Gradients are multiplied by `scale`
// and accumulated into the outputs, which may be null.
double YesNoLossAndGradient(const HiddenStates& hidden, const YesNoHead& head,
                            bool label, double scale, YesNoHead* head_grad,
                            Matrix* hidden_grad);
double SpanLossAndGradient(const HiddenStates& hidden, const SpanHead& head,
                           GoldSpan gold, double scale, SpanHead* head_grad,
                           Matrix* hidden_grad);

inline constexpr std::size_t kDefaultMaxAnswerTokens = 30;
inline constexpr std::size_t kDefaultTopK = 5;

// Top-k spans (i, j) with i <= j < i + max_len ranked by
// P_start[i] * P_end[j]; ties go to smaller i, then smaller j. When `allowed`
// is set both ends must lie in [allowed.begin, allowed.end).
std::vector<SpanPrediction> DecodeSpans(
    std::span<const double> start_probs, std::span<const double> end_probs,
    std::size_t k = kDefaultTopK, std::size_t max_len = kDefaultMaxAnswerTokens,
    std::optional<CharRange> allowed = std::nullopt);

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = false;
};

using LossFunction = std::function<double(std::span<const double>)>;
using GradientFunction =
    std::function<std::vector<double>(std::span<const double>)>;

// Compares the analytic gradient with central differences coordinate by
// coordinate. The relative error of a coordinate is |a - n| / max(|a|, |n|);
// when both magnitudes are below absolute_floor the absolute difference is
// used instead, so vanishing gradients compare on an absolute scale.
// Throws InvalidArgument for step <= 0 or a non-finite loss.
GradCheckResult GradCheck(const LossFunction& loss,
                          const GradientFunction& gradient,
                          std::span<const double> params, double step,
                          double tolerance, double absolute_floor = 1e-8);

}  // namespace bioqa

#endif  // BIOQA_NEURAL_HEADS_H_
