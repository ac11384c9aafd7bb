#include "bioqa/neural_heads.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bioqa/error.h"

namespace bioqa {

namespace {

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

bool AllFinite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

void CheckHidden(const HiddenStates& hidden, std::size_t head_width) {
  if (hidden.length() == 0 || hidden.hidden_size() == 0) {
    throw InvalidArgument("hidden states must be at least 1 x 1");
  }
  if (hidden.hidden_size() != head_width) {
    throw InvalidArgument("head width does not match hidden size");
  }
}

std::pair<std::vector<double>, std::vector<double>> SpanLogits(
    const HiddenStates& hidden, const SpanHead& head) {
  CheckHidden(hidden, head.weights.cols());
  const std::size_t s = hidden.length();
  std::vector<double> start(s), end(s);
  for (std::size_t t = 0; t < s; ++t) {
    start[t] = Dot(hidden.values.row(t), head.weights.row(0));
    end[t] = Dot(hidden.values.row(t), head.weights.row(1));
    if (head.use_bias) {
      start[t] += head.bias[0];
      end[t] += head.bias[1];
    }
  }
  return {std::move(start), std::move(end)};
}

}  // namespace

double Sigmoid(double logit) {
  if (logit >= 0.0) return 1.0 / (1.0 + std::exp(-logit));
  const double e = std::exp(logit);
  return e / (1.0 + e);
}

double YesLogit(std::span<const double> cls, const YesNoHead& head) {
  if (cls.size() != head.weights.size()) {
    throw InvalidArgument("[CLS] vector and yes/no head differ in size");
  }
  return Dot(cls, head.weights) + (head.use_bias ? head.bias : 0.0);
}

double YesProbability(std::span<const double> cls, const YesNoHead& head) {
  if (!AllFinite(cls) || !AllFinite(head.weights) || !std::isfinite(head.bias)) {
    throw InvalidArgument("yes probability needs finite inputs");
  }
  const double logit = YesLogit(cls, head);
  if (!std::isfinite(logit)) throw InvalidArgument("yes logit overflowed");
  return Sigmoid(logit);
}

double BceLoss(double probability, bool label) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw InvalidArgument("BCE probability must lie in (0, 1)");
  }
  return label ? -std::log(probability) : -std::log1p(-probability);
}

double BceLossFromLogit(double logit, bool label) {
  // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z).
  return label ? Softplus(-logit) : Softplus(logit);
}

double BceLogitGradient(double logit, bool label) {
  return Sigmoid(logit) - (label ? 1.0 : 0.0);
}

std::vector<double> LogSoftmax(std::span<const double> logits) {
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - max);
  const double log_norm = max + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_norm;
  return out;
}

SpanDistributions SpanDistributionsFromLogits(std::span<const double> start,
                                              std::span<const double> end) {
  if (start.empty() || start.size() != end.size()) {
    throw InvalidArgument("span logits must be non-empty and equally long");
  }
  if (!AllFinite(start) || !AllFinite(end)) {
    throw InvalidArgument("span logits must be finite");
  }
  SpanDistributions d;
  d.log_start = LogSoftmax(start);
  d.log_end = LogSoftmax(end);
  d.start.resize(start.size());
  d.end.resize(end.size());
  std::transform(d.log_start.begin(), d.log_start.end(), d.start.begin(),
                 [](double v) { return std::exp(v); });
  std::transform(d.log_end.begin(), d.log_end.end(), d.end.begin(),
                 [](double v) { return std::exp(v); });
  return d;
}

SpanDistributions ComputeSpanDistributions(const HiddenStates& hidden,
                                           const SpanHead& head) {
  auto [start, end] = SpanLogits(hidden, head);
  return SpanDistributionsFromLogits(start, end);
}

double SpanLoss(std::span<const SpanDistributions> batch,
                std::span<const GoldSpan> gold) {
  if (batch.empty() || batch.size() != gold.size()) {
    throw InvalidArgument("span loss needs one gold span per batch item");
  }
  double start_loss = 0.0;
  double end_loss = 0.0;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const std::size_t s = batch[n].log_start.size();
    if (gold[n].start > gold[n].end || gold[n].end >= s) {
      throw InvalidArgument("gold span (" + std::to_string(gold[n].start) +
                            ", " + std::to_string(gold[n].end) +
                            ") outside sequence of length " +
                            std::to_string(s));
    }
    start_loss -= batch[n].log_start[gold[n].start];
    end_loss -= batch[n].log_end[gold[n].end];
  }
  const double count = static_cast<double>(batch.size());
  return 0.5 * (start_loss / count + end_loss / count);
}

double YesNoLossAndGradient(const HiddenStates& hidden, const YesNoHead& head,
                            bool label, double scale, YesNoHead* head_grad,
                            Matrix* hidden_grad) {
  CheckHidden(hidden, head.weights.size());
  const auto cls = hidden.values.row(0);
  const double logit = YesLogit(cls, head);
  const double dz = BceLogitGradient(logit, label) * scale;
  if (head_grad != nullptr) {
    for (std::size_t k = 0; k < cls.size(); ++k) {
      head_grad->weights[k] += dz * cls[k];
    }
    if (head.use_bias) head_grad->bias += dz;
  }
  if (hidden_grad != nullptr) {
    auto row = hidden_grad->row(0);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] += dz * head.weights[k];
  }
  return BceLossFromLogit(logit, label);
}

double SpanLossAndGradient(const HiddenStates& hidden, const SpanHead& head,
                           GoldSpan gold, double scale, SpanHead* head_grad,
                           Matrix* hidden_grad) {
  const SpanDistributions d = ComputeSpanDistributions(hidden, head);
  const std::size_t s = hidden.length();
  if (gold.start > gold.end || gold.end >= s) {
    throw InvalidArgument("gold span outside the sequence");
  }
  const std::size_t width = hidden.hidden_size();
  for (std::size_t t = 0; t < s; ++t) {
    const double dz_start =
        0.5 * scale * (d.start[t] - (t == gold.start ? 1.0 : 0.0));
    const double dz_end = 0.5 * scale * (d.end[t] - (t == gold.end ? 1.0 : 0.0));
    const auto h = hidden.values.row(t);
    if (head_grad != nullptr) {
      auto g0 = head_grad->weights.row(0);
      auto g1 = head_grad->weights.row(1);
      for (std::size_t k = 0; k < width; ++k) {
        g0[k] += dz_start * h[k];
        g1[k] += dz_end * h[k];
      }
      if (head.use_bias) {
        head_grad->bias[0] += dz_start;
        head_grad->bias[1] += dz_end;
      }
    }
    if (hidden_grad != nullptr) {
      auto out = hidden_grad->row(t);
      const auto m0 = head.weights.row(0);
      const auto m1 = head.weights.row(1);
      for (std::size_t k = 0; k < width; ++k) {
        out[k] += dz_start * m0[k] + dz_end * m1[k];
      }
    }
  }
  return -0.5 * (d.log_start[gold.start] + d.log_end[gold.end]);
}

std::vector<SpanPrediction> DecodeSpans(std::span<const double> start_probs,
                                        std::span<const double> end_probs,
                                        std::size_t k, std::size_t max_len,
                                        std::optional<CharRange> allowed) {
  std::vector<SpanPrediction> candidates;
  const std::size_t s = std::min(start_probs.size(), end_probs.size());
  std::size_t lo = 0;
  std::size_t hi = s;
  if (allowed) {
    lo = std::min(allowed->begin, s);
    hi = std::min(allowed->end, s);
  }
  for (std::size_t i = lo; i < hi; ++i) {
    for (std::size_t j = i; j < hi && j < i + max_len; ++j) {
      candidates.push_back({i, j, start_probs[i] * end_probs[j]});
    }
  }
  const auto better = [](const SpanPrediction& a, const SpanPrediction& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start_index != b.start_index) return a.start_index < b.start_index;
    return a.end_index < b.end_index;
  };
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + keep,
                    candidates.end(), better);
  candidates.resize(keep);
  return candidates;
}

GradCheckResult GradCheck(const LossFunction& loss,
                          const GradientFunction& gradient,
                          std::span<const double> params, double step,
                          double tolerance, double absolute_floor) {
  if (!(step > 0.0)) throw InvalidArgument("grad check step must be positive");
  std::vector<double> x(params.begin(), params.end());
  if (!std::isfinite(loss(x))) {
    throw InvalidArgument("loss is not finite at the check point");
  }
  const std::vector<double> analytic = gradient(x);
  if (analytic.size() != x.size()) {
    throw InvalidArgument("gradient size does not match parameter count");
  }
  GradCheckResult result;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double plus = loss(x);
    x[i] = saved - step;
    const double minus = loss(x);
    x[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw InvalidArgument("loss is not finite near the check point");
    }
    const double numeric = (plus - minus) / (2.0 * step);
    const double diff = std::abs(analytic[i] - numeric);
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
    const double rel = scale < absolute_floor ? diff : diff / scale;
    result.max_absolute_error = std::max(result.max_absolute_error, diff);
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_index = i;
    }
  }
  result.passed = result.max_relative_error < tolerance;
  return result;
}

}  // namespace bioqa
