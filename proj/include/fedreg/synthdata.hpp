#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedreg/losses.hpp"
#include "fedreg/tensor.hpp"

namespace fedreg {

// Synthetic severity bands, ordered by increasing distortion strength.
// H = high intelligibility (mildest), VL = very low (most distorted).
enum class Severity { H = 0, M = 1, L = 2, VL = 3 };

const char* severity_name(Severity s);
Severity severity_from_name(const std::string& name);  // throws ConfigError
double severity_strength(Severity s);                  // 0.25 / 0.5 / 0.75 / 1.0

struct ScenarioConfig {
  int n_clients = 16;
  int utterances_min = 60;
  int utterances_max = 180;
  int test_per_client = 5;
  int vocab_size = 8;   // includes blank 0; labels drawn from 1..vocab-1
  int input_dim = 8;
  int label_len_min = 1;
  int label_len_max = 4;
  int frames_per_token_min = 3;
  int frames_per_token_max = 5;
  double dirichlet_alpha = 0.3;      // label-distribution skew (smaller = more skew)
  double noise_base = 0.5;           // additive Gaussian noise scale
  double channel_base = 0.3;         // per-client linear channel strength
  double stretch_base = 0.25;        // temporal stretching fraction
  std::vector<Severity> severity_mix = {Severity::VL, Severity::L, Severity::M, Severity::H};
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

// A single synthetic utterance; CTC-feasible by construction.
struct Utterance {
  int client_id = 0;
  Severity severity = Severity::H;
  Sample sample;
};

struct Scenario {
  ScenarioConfig config;
  std::vector<std::vector<Utterance>> shards;  // one per client
  std::vector<Utterance> test_set;
  std::vector<Severity> client_severity;
};

// Deterministic function of (config, config.seed).
Scenario generate_scenario(const ScenarioConfig& cfg);

struct PartitionStats {
  std::vector<std::size_t> counts;
  std::vector<double> weights;                      // n_i / sum n_j
  std::vector<std::vector<std::size_t>> label_histograms;  // per client, over 1..vocab-1
  std::vector<double> label_entropy;                // nats
  std::size_t total = 0;
};

PartitionStats partition_stats(const Scenario& scenario);

// JSON-lines persistence: a header line followed by one utterance per line.
void save_corpus(const std::string& path, const Scenario& scenario);
Scenario load_corpus(const std::string& path);

}  // namespace fedreg
