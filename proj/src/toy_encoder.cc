#include "bioqa/toy_encoder.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "bioqa/error.h"
#include "bioqa/utf8.h"

namespace bioqa {

namespace {

constexpr char32_t kCls[] = U"\x01[CLS]";
constexpr char32_t kSep[] = U"\x01[SEP]";

// Uniform in [-scale, scale) from the top 53 bits of a 64-bit draw.
double Draw(std::mt19937_64& rng, double scale) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * unit - 1.0) * scale;
}

void Fill(Matrix* m, std::mt19937_64& rng, double scale) {
  for (double& v : m->data()) v = Draw(rng, scale);
}

void Axpy(std::span<double> y, std::span<const double> x, double a) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

std::uint64_t Fnv1a64(std::span<const unsigned char> bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::vector<Token> Tokenize(std::string_view text) {
  const std::u32string chars = utf8::Decode(text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < chars.size()) {
    if (utf8::IsSpace(chars[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (utf8::IsAlnum(chars[i])) {
      while (j < chars.size() && utf8::IsAlnum(chars[j])) ++j;
    }
    tokens.push_back({chars.substr(i, j - i), {i, j}});
    i = j;
  }
  return tokens;
}

ToyEncoder::ToyEncoder(const ToyEncoderConfig& config)
    : config_(config),
      embeddings_(config.buckets, config.hidden_size),
      segments_(2, config.hidden_size),
      mix_(config.hidden_size, config.hidden_size),
      context_mix_(config.hidden_size, config.hidden_size),
      bias_(config.hidden_size, 0.0) {
  if (config.buckets == 0 || config.hidden_size == 0 || config.ngram == 0) {
    throw InvalidArgument("toy encoder dimensions must be positive");
  }
  std::mt19937_64 rng(config.seed);
  Fill(&embeddings_, rng, config.init_scale);
  Fill(&segments_, rng, config.init_scale);
  const double mix_scale = 1.0 / std::sqrt(static_cast<double>(config.hidden_size));
  Fill(&mix_, rng, mix_scale);
  Fill(&context_mix_, rng, mix_scale);
}

std::vector<std::size_t> ToyEncoder::Features(std::u32string_view token) const {
  std::u32string padded = U"<";
  padded += token;
  padded += U">";
  std::vector<std::u32string> grams;
  grams.push_back(padded);  // whole-token feature
  const std::size_t n = config_.ngram;
  if (padded.size() > n) {
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
      grams.push_back(padded.substr(i, n));
    }
  }
  const std::uint64_t basis =
      0xcbf29ce484222325ULL ^ (config_.seed * 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> out;
  out.reserve(grams.size());
  for (const std::u32string& g : grams) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(g.data());
    out.push_back(static_cast<std::size_t>(
        Fnv1a64({bytes, g.size() * sizeof(char32_t)}, basis) %
        config_.buckets));
  }
  return out;
}

ToyEncoder::Trace ToyEncoder::Forward(std::string_view question,
                                      std::string_view context) const {
  const std::vector<Token> q = Tokenize(question);
  const std::vector<Token> c = Tokenize(context);
  const std::size_t s = q.size() + c.size() + 3;
  const std::size_t width = config_.hidden_size;

  Trace trace;
  trace.features.reserve(s);
  trace.segments.reserve(s);
  trace.output.provenance.assign(s, std::nullopt);
  trace.features.push_back(Features(kCls));
  trace.segments.push_back(0);
  for (const Token& t : q) {
    trace.features.push_back(Features(t.text));
    trace.segments.push_back(0);
  }
  trace.features.push_back(Features(kSep));
  trace.segments.push_back(0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    trace.output.provenance[trace.features.size()] = c[k].range;
    trace.features.push_back(Features(c[k].text));
    trace.segments.push_back(1);
  }
  trace.features.push_back(Features(kSep));
  trace.segments.push_back(1);

  trace.inputs = Matrix(s, width);
  trace.mean_input.assign(width, 0.0);
  for (std::size_t t = 0; t < s; ++t) {
    auto x = trace.inputs.row(t);
    const double inv = 1.0 / static_cast<double>(trace.features[t].size());
    for (std::size_t f : trace.features[t]) Axpy(x, embeddings_.row(f), inv);
    Axpy(x, segments_.row(trace.segments[t]), 1.0);
    Axpy(trace.mean_input, x, 1.0 / static_cast<double>(s));
  }

  std::vector<double> shared(bias_);
  for (std::size_t i = 0; i < width; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      shared[i] += context_mix_(i, j) * trace.mean_input[j];
    }
  }
  trace.output.values = Matrix(s, width);
  for (std::size_t t = 0; t < s; ++t) {
    const auto x = trace.inputs.row(t);
    auto h = trace.output.values.row(t);
    for (std::size_t i = 0; i < width; ++i) {
      double z = shared[i];
      for (std::size_t j = 0; j < width; ++j) z += mix_(i, j) * x[j];
      h[i] = std::tanh(z);
    }
  }
  return trace;
}

HiddenStates ToyEncoder::Encode(std::string_view question,
                                std::string_view context) const {
  return Forward(question, context).output;
}

EncoderGradients ToyEncoder::ZeroGradients() const {
  const std::size_t width = config_.hidden_size;
  return {Matrix(config_.buckets, width), Matrix(2, width), Matrix(width, width),
          Matrix(width, width), std::vector<double>(width, 0.0)};
}

void ToyEncoder::Backward(const Trace& trace, const Matrix& hidden_grad,
                          EncoderGradients* grads) const {
  const std::size_t s = trace.inputs.rows();
  const std::size_t width = config_.hidden_size;
  Matrix dz(s, width);
  std::vector<double> dshared(width, 0.0);
  for (std::size_t t = 0; t < s; ++t) {
    const auto h = trace.output.values.row(t);
    const auto g = hidden_grad.row(t);
    auto d = dz.row(t);
    for (std::size_t i = 0; i < width; ++i) {
      d[i] = g[i] * (1.0 - h[i] * h[i]);
      dshared[i] += d[i];
    }
  }
  for (std::size_t i = 0; i < width; ++i) {
    grads->bias[i] += dshared[i];
    for (std::size_t j = 0; j < width; ++j) {
      grads->context_mix(i, j) += dshared[i] * trace.mean_input[j];
    }
  }
  // d mean(x) = U^T dshared, spread evenly over positions.
  std::vector<double> dmean(width, 0.0);
  for (std::size_t i = 0; i < width; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      dmean[j] += context_mix_(i, j) * dshared[i];
    }
  }
  const double inv_s = 1.0 / static_cast<double>(s);
  std::vector<double> dx(width);
  for (std::size_t t = 0; t < s; ++t) {
    const auto x = trace.inputs.row(t);
    const auto d = dz.row(t);
    for (std::size_t j = 0; j < width; ++j) dx[j] = dmean[j] * inv_s;
    for (std::size_t i = 0; i < width; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        grads->mix(i, j) += d[i] * x[j];
        dx[j] += mix_(i, j) * d[i];
      }
    }
    Axpy(grads->segments.row(trace.segments[t]), dx, 1.0);
    const double inv = 1.0 / static_cast<double>(trace.features[t].size());
    for (std::size_t f : trace.features[t]) {
      Axpy(grads->embeddings.row(f), dx, inv);
    }
  }
}

void ToyEncoder::ApplyGradients(const EncoderGradients& grads,
                                double learning_rate) {
  auto step = [learning_rate](std::span<double> p, std::span<const double> g) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= learning_rate * g[i];
  };
  step(embeddings_.data(), grads.embeddings.data());
  step(segments_.data(), grads.segments.data());
  step(mix_.data(), grads.mix.data());
  step(context_mix_.data(), grads.context_mix.data());
  step(bias_, grads.bias);
}

std::vector<double> ToyEncoder::Parameters() const {
  std::vector<double> out;
  for (auto part : {embeddings_.data(), segments_.data(), mix_.data(),
                    context_mix_.data(), std::span<const double>(bias_)}) {
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

void ToyEncoder::SetParameters(std::span<const double> values) {
  std::size_t offset = 0;
  for (std::span<double> part : {embeddings_.data(), segments_.data(),
                                 mix_.data(), context_mix_.data(),
                                 std::span<double>(bias_)}) {
    if (offset + part.size() > values.size()) {
      throw InvalidArgument("too few parameters for the toy encoder");
    }
    std::copy(values.begin() + offset, values.begin() + offset + part.size(),
              part.begin());
    offset += part.size();
  }
  if (offset != values.size()) {
    throw InvalidArgument("too many parameters for the toy encoder");
  }
}

std::vector<double> ToyEncoder::Flatten(const EncoderGradients& grads) {
  std::vector<double> out;
  for (auto part : {grads.embeddings.data(), grads.segments.data(),
                    grads.mix.data(), grads.context_mix.data(),
                    std::span<const double>(grads.bias)}) {
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::string ToyEncoder::Checksum() const {
  const std::vector<double> params = Parameters();
  const auto* bytes = reinterpret_cast<const unsigned char*>(params.data());
  return HexDigest(Fnv1a64({bytes, params.size() * sizeof(double)}));
}

}  // namespace bioqa
