#include "qrvrp/instance.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qrvrp/error.hpp"

namespace qrvrp {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_number(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool contains_word(std::string_view line, std::string_view word) {
  return line.find(word) != std::string_view::npos;
}

}  // namespace

std::string to_string(HistorySetting s) {
  switch (s) {
    case HistorySetting::all: return "all";
    case HistorySetting::half: return "half";
    case HistorySetting::quar: return "quar";
  }
  return "?";
}

HistorySetting parse_history_setting(std::string_view text) {
  if (text == "all") return HistorySetting::all;
  if (text == "half") return HistorySetting::half;
  if (text == "quar") return HistorySetting::quar;
  throw Error("unknown history setting '" + std::string(text) + "' (expected all|half|quar)");
}

std::size_t DemandHistory::record_count() const {
  std::size_t n = 0;
  for (const auto& c : customers) n += c.values.size();
  return n;
}

SolomonInstance parse_solomon(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos <= text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }

  SolomonInstance inst;
  std::size_t i = 0;
  auto skip_blank = [&] {
    while (i < lines.size() && split_ws(lines[i]).empty()) ++i;
  };
  auto lineno = [&] { return static_cast<int>(i) + 1; };

  skip_blank();
  if (i == lines.size()) throw ParseError("empty input", 0);
  {
    auto tokens = split_ws(lines[i]);
    if (contains_word(lines[i], "VEHICLE")) throw ParseError("missing instance name", lineno());
    inst.name = std::string(tokens.front());
    ++i;
  }

  skip_blank();
  if (i == lines.size() || !contains_word(lines[i], "VEHICLE"))
    throw ParseError("malformed header: expected VEHICLE section", lineno());
  ++i;
  skip_blank();
  if (i < lines.size() && contains_word(lines[i], "NUMBER")) ++i;
  skip_blank();
  if (i == lines.size()) throw ParseError("malformed header: missing vehicle count and capacity", lineno());
  {
    auto tokens = split_ws(lines[i]);
    double count = 0.0, cap = 0.0;
    if (tokens.size() != 2 || !parse_number(tokens[0], count) || !parse_number(tokens[1], cap))
      throw ParseError("malformed header: expected '<vehicle count> <capacity>'", lineno());
    if (cap <= 0.0) throw ParseError("malformed header: capacity must be positive", lineno());
    inst.listed_vehicle_count = static_cast<int>(count);
    inst.capacity = cap;
    ++i;
  }

  skip_blank();
  if (i == lines.size() || !contains_word(lines[i], "CUSTOMER"))
    throw ParseError("malformed header: expected CUSTOMER section", lineno());
  ++i;
  skip_blank();
  if (i < lines.size() && contains_word(lines[i], "CUST")) ++i;

  for (; i < lines.size(); ++i) {
    auto tokens = split_ws(lines[i]);
    if (tokens.empty()) continue;
    if (tokens.size() != 7)
      throw ParseError("expected 7 fields per node row, found " + std::to_string(tokens.size()), lineno());
    double v[7];
    for (int k = 0; k < 7; ++k) {
      if (!parse_number(tokens[k], v[k]))
        throw ParseError("non-numeric field '" + std::string(tokens[k]) + "'", lineno());
    }
    Node node{static_cast<int>(v[0]), v[1], v[2], v[3], v[4], v[5], v[6]};
    if (node.id != v[0]) throw ParseError("node id must be an integer", lineno());
    for (const auto& prev : inst.nodes) {
      if (prev.id == node.id) throw ParseError("duplicate node id " + std::to_string(node.id), lineno());
    }
    const int expected = static_cast<int>(inst.nodes.size());
    if (expected == 0 && node.id != 0) throw ParseError("missing depot row (first row must have id 0)", lineno());
    if (node.id != expected)
      throw ParseError("node ids must be contiguous, expected " + std::to_string(expected), lineno());
    if (node.demand < 0.0 || node.service < 0.0)
      throw ParseError("demand and service time must be non-negative", lineno());
    if (node.ready > node.due) throw ParseError("ready time exceeds due date", lineno());
    if (node.id == 0 && (node.demand != 0.0 || node.service != 0.0))
      throw ParseError("depot must have zero demand and service time", lineno());
    inst.nodes.push_back(node);
  }
  if (inst.nodes.empty()) throw ParseError("missing depot row", static_cast<int>(lines.size()));
  return inst;
}

SolomonInstance load_solomon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_solomon(ss.str());
}

TravelMatrix build_travel_matrix(const SolomonInstance& instance) {
  const auto n = static_cast<Eigen::Index>(instance.nodes.size());
  TravelMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& a = instance.nodes[i];
      const auto& b = instance.nodes[j];
      m(i, j) = m(j, i) = std::hypot(a.x - b.x, a.y - b.y);
    }
  }
  return m;
}

MixtureWeights mixture_weights(const FeatureVector& features) {
  const auto logits = features.tail<kMixtureComponents>();
  const double shift = logits.maxCoeff();
  MixtureWeights w = (logits.array() - shift).exp().matrix();
  return w / w.sum();
}

AugmentedInstance augment(const SolomonInstance& instance, std::uint64_t seed) {
  AugmentedInstance aug;
  aug.base = instance;
  aug.base.capacity = instance.capacity / 2.0;
  aug.seed = seed;
  const auto n = instance.nodes.size();
  aug.features.assign(n, FeatureVector::Zero());
  aug.mixture.assign(n, MixtureWeights::Zero());
  for (std::size_t i = 1; i < n; ++i) {
    Stream rng(seed, StreamTag::features, static_cast<std::uint64_t>(instance.nodes[i].id));
    FeatureVector f;
    f(0) = instance.nodes[i].demand;
    for (int k = 1; k < kFeatureDim; ++k) f(k) = rng.uniform();
    aug.features[i] = f;
    aug.mixture[i] = mixture_weights(f);
  }
  return aug;
}

double sample_demand(const AugmentedInstance& aug, int customer, Stream& rng) {
  if (customer < 1 || customer > aug.customer_count())
    throw Error("sample_demand: no customer " + std::to_string(customer));
  const FeatureVector& f = aug.features[customer];
  const MixtureWeights& p = aug.mixture[customer];
  constexpr int kMaxAttempts = 10000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const double u = rng.uniform();
    int k = 0;
    double acc = p(0);
    while (k < kMixtureComponents - 1 && u >= acc) acc += p(++k);
    const double draw = f(0) + kModeOffsets[k] + rng.normal();
    if (draw >= 0.0) return draw;
  }
  throw Error("sample_demand: rejection sampling exceeded " + std::to_string(kMaxAttempts) +
              " attempts for customer " + std::to_string(customer));
}

DemandHistory generate_history(const AugmentedInstance& aug, HistorySetting setting,
                               int observations, std::uint64_t seed) {
  if (observations < 0) throw Error("generate_history: observation count must be non-negative");
  const int n = aug.customer_count();
  int first_with_history = 1;
  if (setting == HistorySetting::half) {
    if (n % 2 != 0) throw Error("generate_history: 'half' needs an even customer count, got " + std::to_string(n));
    first_with_history = n - n / 2 + 1;
  } else if (setting == HistorySetting::quar) {
    if (n % 4 != 0) throw Error("generate_history: 'quar' needs a customer count divisible by 4, got " + std::to_string(n));
    first_with_history = n - n / 4 + 1;
  }

  DemandHistory h;
  h.setting = setting;
  h.observations = observations;
  h.customers.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) {
    h.customers[i].features = aug.features[i];
    if (i < first_with_history) continue;
    auto& values = h.customers[i].values;
    values.reserve(static_cast<std::size_t>(observations));
    for (int l = 0; l < observations; ++l) {
      Stream rng(seed, StreamTag::history, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(l));
      values.push_back(sample_demand(aug, i, rng));
    }
  }
  return h;
}

AugmentedInstance take_first(const AugmentedInstance& aug, int m) {
  if (m < 1 || m > aug.customer_count())
    throw Error("take_first: m=" + std::to_string(m) + " outside [1, " + std::to_string(aug.customer_count()) + "]");
  AugmentedInstance sub = aug;
  const auto keep = static_cast<std::size_t>(m) + 1;
  sub.base.nodes.resize(keep);
  sub.features.resize(keep);
  sub.mixture.resize(keep);
  return sub;
}

}  // namespace qrvrp
