#ifndef BIOQA_TOY_ENCODER_H_
#define BIOQA_TOY_ENCODER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioqa/model.h"
#include "bioqa/neural_heads.h"

namespace bioqa {

struct Token {
  std::u32string text;
  CharRange range;  // character offsets in the source string
};

// Runs of alphanumeric characters form one token; any other non-space
// character is a token of its own.
std::vector<Token> Tokenize(std::string_view text);

struct ToyEncoderConfig {
  std::size_t buckets = 1024;  // hashed feature table rows
  std::size_t hidden_size = 16;
  std::size_t ngram = 3;
  std::uint64_t seed = 17;
  double init_scale = 0.1;
};

struct EncoderGradients {
  Matrix embeddings;
  Matrix segments;
  Matrix mix;
  Matrix context_mix;
  std::vector<double> bias;
};

// Deterministic stand-in for a pretrained encoder. Each token is the mean of
// hashed character n-gram embeddings plus a segment embedding; one mixing
// layer combines it with the sequence mean:
//   x_t = mean(E[features(t)]) + S[segment(t)]
//   h_t = tanh(W x_t + U mean(x) + b)
// The input layout is [CLS] question [SEP] context [SEP].
class ToyEncoder {
 public:
  explicit ToyEncoder(const ToyEncoderConfig& config = {});

  // Everything Backward needs from a forward pass.
  struct Trace {
    std::vector<std::vector<std::size_t>> features;
    std::vector<std::size_t> segments;
    Matrix inputs;
    std::vector<double> mean_input;
    HiddenStates output;
  };

  HiddenStates Encode(std::string_view question, std::string_view context) const;
  Trace Forward(std::string_view question, std::string_view context) const;

  // Accumulates parameter gradients given dL/dh for every position.
  void Backward(const Trace& trace, const Matrix& hidden_grad,
                EncoderGradients* grads) const;

  EncoderGradients ZeroGradients() const;
  // params -= learning_rate * grads
  void ApplyGradients(const EncoderGradients& grads, double learning_rate);

  // All parameters flattened in a fixed order, for gradient checks.
  std::vector<double> Parameters() const;
  void SetParameters(std::span<const double> values);
  static std::vector<double> Flatten(const EncoderGradients& grads);

  // FNV-1a over the raw bytes of every parameter, as 16 hex digits.
  std::string Checksum() const;

  const ToyEncoderConfig& config() const { return config_; }
  std::size_t hidden_size() const { return config_.hidden_size; }

 private:
  std::vector<std::size_t> Features(std::u32string_view token) const;

  ToyEncoderConfig config_;
  Matrix embeddings_;   // buckets x H
  Matrix segments_;     // 2 x H
  Matrix mix_;          // W, H x H
  Matrix context_mix_;  // U, H x H
  std::vector<double> bias_;
};

// FNV-1a 64 over bytes; shared by checksums and feature hashing.
std::uint64_t Fnv1a64(std::span<const unsigned char> bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string HexDigest(std::uint64_t value);

}  // namespace bioqa

#endif  // BIOQA_TOY_ENCODER_H_
