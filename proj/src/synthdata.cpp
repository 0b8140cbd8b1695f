#include "fedreg/synthdata.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "fedreg/errors.hpp"
#include "fedreg/rng.hpp"

namespace fedreg {

using nlohmann::json;

const char* severity_name(Severity s) {
  switch (s) {
    case Severity::H: return "H";
    case Severity::M: return "M";
    case Severity::L: return "L";
    case Severity::VL: return "VL";
  }
  return "?";
}

Severity severity_from_name(const std::string& name) {
  if (name == "H") return Severity::H;
  if (name == "M") return Severity::M;
  if (name == "L") return Severity::L;
  if (name == "VL") return Severity::VL;
  throw ConfigError("unknown severity '" + name + "' (expected VL, L, M or H)");
}

double severity_strength(Severity s) {
  switch (s) {
    case Severity::H: return 0.25;
    case Severity::M: return 0.5;
    case Severity::L: return 0.75;
    case Severity::VL: return 1.0;
  }
  return 1.0;
}

void ScenarioConfig::validate() const {
  if (n_clients < 1) throw ConfigError("scenario: n_clients must be >= 1");
  if (utterances_min < 1 || utterances_max < utterances_min) {
    throw ConfigError("scenario: bad utterance count range");
  }
  if (test_per_client < 1) throw ConfigError("scenario: test_per_client must be >= 1");
  if (vocab_size < 2) throw ConfigError("scenario: vocab_size must be >= 2");
  if (input_dim < 1) throw ConfigError("scenario: input_dim must be >= 1");
  if (label_len_min < 1 || label_len_max < label_len_min) {
    throw ConfigError("scenario: bad label length range");
  }
  if (frames_per_token_min < 3 || frames_per_token_max < frames_per_token_min) {
    // >= 3 frames per token keeps every utterance CTC-feasible (T >= 2U+1).
    throw ConfigError("scenario: frames_per_token range must satisfy 3 <= min <= max");
  }
  if (dirichlet_alpha <= 0.0) throw ConfigError("scenario: dirichlet_alpha must be positive");
  if (noise_base < 0.0 || channel_base < 0.0 || stretch_base < 0.0) {
    throw ConfigError("scenario: distortion scales must be >= 0");
  }
  if (severity_mix.empty()) throw ConfigError("scenario: severity_mix must be non-empty");
}

namespace {

// Canonical per-token feature prototypes, shared across all clients.
std::vector<Tensor> make_prototypes(const ScenarioConfig& cfg, Rng& rng) {
  std::vector<Tensor> protos;
  protos.reserve(static_cast<std::size_t>(cfg.vocab_size));
  for (int tok = 0; tok < cfg.vocab_size; ++tok) {
    int frames = static_cast<int>(rng.uniform_int(cfg.frames_per_token_min,
                                                  cfg.frames_per_token_max));
    Tensor t = Tensor::zeros({static_cast<std::size_t>(frames),
                              static_cast<std::size_t>(cfg.input_dim)});
    for (double& v : t.data) v = rng.gauss();
    protos.push_back(std::move(t));
  }
  return protos;
}

struct ClientDistortion {
  double noise = 0.0;
  double channel = 0.0;
  double stretch = 0.0;
  Tensor channel_matrix;  // input_dim x input_dim, near identity
};

ClientDistortion make_distortion(const ScenarioConfig& cfg, Severity sev, Rng& rng) {
  double strength = severity_strength(sev);
  ClientDistortion d;
  d.noise = cfg.noise_base * strength;
  d.channel = cfg.channel_base * strength;
  d.stretch = cfg.stretch_base * strength;
  std::size_t n = static_cast<std::size_t>(cfg.input_dim);
  d.channel_matrix = Tensor::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double base = i == j ? 1.0 : 0.0;
      d.channel_matrix.data[i * n + j] = base + d.channel * rng.gauss();
    }
  }
  return d;
}

Tensor apply_distortion(const Tensor& clean, const ClientDistortion& d, Rng& rng) {
  std::size_t frames = clean.rows(), dim = clean.cols();
  // Temporal stretching: duplicate a severity-scaled number of random frames.
  std::size_t extra = static_cast<std::size_t>(
      std::llround(d.stretch * static_cast<double>(frames)));
  std::vector<std::size_t> positions;
  positions.reserve(frames + extra);
  for (std::size_t t = 0; t < frames; ++t) positions.push_back(t);
  for (std::size_t e = 0; e < extra; ++e) {
    std::size_t at = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(positions.size()) - 1));
    positions.insert(positions.begin() + static_cast<std::ptrdiff_t>(at), positions[at]);
  }
  Tensor out = Tensor::zeros({positions.size(), dim});
  for (std::size_t t = 0; t < positions.size(); ++t) {
    const double* src = &clean.data[positions[t] * dim];
    // channel transform then additive noise
    for (std::size_t j = 0; j < dim; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < dim; ++i) acc += src[i] * d.channel_matrix.data[i * dim + j];
      out.data[t * dim + j] = acc + d.noise * rng.gauss();
    }
  }
  return out;
}

Utterance make_utterance(const ScenarioConfig& cfg, int client, Severity sev,
                         const std::vector<Tensor>& protos,
                         const std::vector<double>& label_probs,
                         const ClientDistortion& distortion, Rng& rng) {
  int len = static_cast<int>(rng.uniform_int(cfg.label_len_min, cfg.label_len_max));
  Utterance utt;
  utt.client_id = client;
  utt.severity = sev;
  utt.sample.labels.tokens.reserve(static_cast<std::size_t>(len));
  std::size_t total_frames = 0;
  for (int i = 0; i < len; ++i) {
    double u = rng.uniform();
    double acc = 0.0;
    int tok = cfg.vocab_size - 1;
    for (int t = 1; t < cfg.vocab_size; ++t) {
      acc += label_probs[static_cast<std::size_t>(t - 1)];
      if (u < acc) {
        tok = t;
        break;
      }
    }
    utt.sample.labels.tokens.push_back(tok);
    total_frames += protos[static_cast<std::size_t>(tok)].rows();
  }
  Tensor clean = Tensor::zeros({total_frames, static_cast<std::size_t>(cfg.input_dim)});
  std::size_t off = 0;
  for (int tok : utt.sample.labels.tokens) {
    const Tensor& p = protos[static_cast<std::size_t>(tok)];
    std::copy(p.data.begin(), p.data.end(), clean.data.begin() + static_cast<std::ptrdiff_t>(off));
    off += p.data.size();
  }
  utt.sample.features = apply_distortion(clean, distortion, rng);
  return utt;
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario scen;
  scen.config = cfg;
  Rng proto_rng = Rng::fork(cfg.seed, 0xdeed);
  std::vector<Tensor> protos = make_prototypes(cfg, proto_rng);

  scen.shards.resize(static_cast<std::size_t>(cfg.n_clients));
  scen.client_severity.resize(static_cast<std::size_t>(cfg.n_clients));
  int n_tokens = cfg.vocab_size - 1;
  for (int c = 0; c < cfg.n_clients; ++c) {
    Rng rng = Rng::fork(cfg.seed, 0x1000 + static_cast<std::uint64_t>(c));
    Severity sev = cfg.severity_mix[static_cast<std::size_t>(c) % cfg.severity_mix.size()];
    scen.client_severity[static_cast<std::size_t>(c)] = sev;
    ClientDistortion distortion = make_distortion(cfg, sev, rng);
    std::vector<double> label_probs =
        rng.dirichlet(cfg.dirichlet_alpha, static_cast<std::size_t>(n_tokens));
    int count = static_cast<int>(rng.uniform_int(cfg.utterances_min, cfg.utterances_max));
    auto& shard = scen.shards[static_cast<std::size_t>(c)];
    shard.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      shard.push_back(make_utterance(cfg, c, sev, protos, label_probs, distortion, rng));
    }
    // Held-out utterances from the same client regime, disjoint by draw.
    for (int i = 0; i < cfg.test_per_client; ++i) {
      scen.test_set.push_back(make_utterance(cfg, c, sev, protos, label_probs, distortion, rng));
    }
  }
  return scen;
}

PartitionStats partition_stats(const Scenario& scenario) {
  PartitionStats stats;
  int n_tokens = scenario.config.vocab_size - 1;
  for (const auto& shard : scenario.shards) {
    stats.counts.push_back(shard.size());
    stats.total += shard.size();
    std::vector<std::size_t> hist(static_cast<std::size_t>(n_tokens), 0);
    for (const auto& utt : shard) {
      for (int tok : utt.sample.labels.tokens) hist[static_cast<std::size_t>(tok - 1)]++;
    }
    double total = 0.0;
    for (std::size_t h : hist) total += static_cast<double>(h);
    double entropy = 0.0;
    for (std::size_t h : hist) {
      if (h == 0) continue;
      double p = static_cast<double>(h) / total;
      entropy -= p * std::log(p);
    }
    stats.label_histograms.push_back(std::move(hist));
    stats.label_entropy.push_back(entropy);
  }
  for (std::size_t c : stats.counts) {
    stats.weights.push_back(static_cast<double>(c) / static_cast<double>(stats.total));
  }
  return stats;
}

namespace {

json utterance_to_json(const Utterance& utt, const char* split) {
  json j;
  j["split"] = split;
  j["client"] = utt.client_id;
  j["severity"] = severity_name(utt.severity);
  j["labels"] = utt.sample.labels.tokens;
  std::size_t frames = utt.sample.features.rows(), dim = utt.sample.features.cols();
  json rows = json::array();
  for (std::size_t t = 0; t < frames; ++t) {
    json row = json::array();
    for (std::size_t i = 0; i < dim; ++i) row.push_back(utt.sample.features.data[t * dim + i]);
    rows.push_back(std::move(row));
  }
  j["features"] = std::move(rows);
  return j;
}

Utterance utterance_from_json(const json& j, int input_dim) {
  Utterance utt;
  utt.client_id = j.at("client").get<int>();
  utt.severity = severity_from_name(j.at("severity").get<std::string>());
  utt.sample.labels.tokens = j.at("labels").get<std::vector<int>>();
  const json& rows = j.at("features");
  Tensor feats = Tensor::zeros({rows.size(), static_cast<std::size_t>(input_dim)});
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const json& row = rows[t];
    if (row.size() != static_cast<std::size_t>(input_dim)) {
      throw DataError("corpus: feature row width mismatch");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      feats.data[t * static_cast<std::size_t>(input_dim) + i] = row[i].get<double>();
    }
  }
  utt.sample.features = std::move(feats);
  return utt;
}

}  // namespace

void save_corpus(const std::string& path, const Scenario& scenario) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open corpus for writing: " + path);
  const ScenarioConfig& cfg = scenario.config;
  json header;
  header["schema"] = "fedreg-corpus-v1";
  header["n_clients"] = cfg.n_clients;
  header["vocab_size"] = cfg.vocab_size;
  header["input_dim"] = cfg.input_dim;
  json sev = json::array();
  for (Severity s : scenario.client_severity) sev.push_back(severity_name(s));
  header["client_severity"] = std::move(sev);
  os << header.dump() << "\n";
  for (const auto& shard : scenario.shards) {
    for (const auto& utt : shard) os << utterance_to_json(utt, "train").dump() << "\n";
  }
  for (const auto& utt : scenario.test_set) os << utterance_to_json(utt, "test").dump() << "\n";
  if (!os) throw DataError("failed writing corpus: " + path);
}

Scenario load_corpus(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open corpus: " + path);
  std::string line;
  if (!std::getline(is, line)) throw DataError("corpus is empty: " + path);
  json header = json::parse(line, nullptr, true);
  if (header.value("schema", "") != "fedreg-corpus-v1") {
    throw DataError("corpus: unknown schema header in " + path);
  }
  Scenario scen;
  scen.config.n_clients = header.at("n_clients").get<int>();
  scen.config.vocab_size = header.at("vocab_size").get<int>();
  scen.config.input_dim = header.at("input_dim").get<int>();
  for (const auto& s : header.at("client_severity")) {
    scen.client_severity.push_back(severity_from_name(s.get<std::string>()));
  }
  scen.shards.resize(static_cast<std::size_t>(scen.config.n_clients));
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line);
    Utterance utt = utterance_from_json(j, scen.config.input_dim);
    validate_labels(utt.sample.labels, scen.config.vocab_size);
    if (utt.client_id < 0 || utt.client_id >= scen.config.n_clients) {
      throw DataError("corpus line " + std::to_string(line_no) + ": bad client id");
    }
    std::string split = j.at("split").get<std::string>();
    if (split == "train") {
      scen.shards[static_cast<std::size_t>(utt.client_id)].push_back(std::move(utt));
    } else if (split == "test") {
      scen.test_set.push_back(std::move(utt));
    } else {
      throw DataError("corpus line " + std::to_string(line_no) + ": bad split '" + split + "'");
    }
  }
  return scen;
}

}  // namespace fedreg
