#include "mlgan/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mlgan/errors.hpp"

namespace mlgan {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ConfigError("'" + key + "': cannot parse '" + text + "' as a number");
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  // from_chars for double is available, but accept what strtod accepts too (e.g. "1e-4").
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': cannot parse '" + text + "' as a real number");
  }
  if (used != text.size()) throw ConfigError("'" + key + "': trailing characters in '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_reals(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_real(key, item));
  return out;
}

Objective parse_objective(const std::string& text) {
  if (text == "vanilla" || text == "mlgan_vanilla") return Objective::mlgan_vanilla;
  if (text == "clipping" || text == "mlgan_clipping") return Objective::mlgan_clipping;
  if (text == "center" || text == "center_penalty" || text == "mlgan_center") return Objective::mlgan_center;
  if (text == "gan_baseline" || text == "baseline") return Objective::gan_baseline;
  throw ConfigError("variant: unknown value '" + text + "' (vanilla, clipping, center_penalty, gan_baseline)");
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string real_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string objective_name(Objective o) {
  switch (o) {
    case Objective::mlgan_vanilla: return "mlgan_vanilla";
    case Objective::mlgan_clipping: return "mlgan_clipping";
    case Objective::mlgan_center: return "mlgan_center";
    case Objective::gan_baseline: return "gan_baseline";
  }
  return "mlgan_vanilla";
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + text + "'");
  auto key = trim(text.substr(0, eq));
  auto value = trim(text.substr(eq + 1));
  if (key.empty()) throw ConfigError("empty key in '" + text + "'");
  return {key, value};
}

ExperimentConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto [key, value] = split_assignment(line);
    if (!values.emplace(key, value).second)
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key + "' appears twice");
  }
  for (const auto& o : overrides) {
    auto [key, value] = split_assignment(o);
    values[key] = value;
  }
  if (values.count("seed") && values.count("seeds")) {
    // `seed` is shorthand for a one-element list; whichever one an override set wins.
    std::string last;
    for (const auto& o : overrides)
      if (auto key = split_assignment(o).first; key == "seed" || key == "seeds") last = key;
    if (last.empty()) throw ConfigError("set either 'seed' or 'seeds', not both");
    values.erase(last == "seed" ? "seeds" : "seed");
  }

  ExperimentConfig cfg;
  TrainConfig& t = cfg.train;

  // Variant first: several defaults depend on it.
  if (auto it = values.find("variant"); it != values.end()) cfg.objective = parse_objective(it->second);
  const bool center = cfg.objective == Objective::mlgan_center;
  t.model = cfg.objective == Objective::gan_baseline ? Model::gan_baseline : Model::mlgan;
  t.d_dim = center ? 5 : 64;
  if (auto it = values.find("d_dim"); it != values.end()) t.d_dim = parse_number<std::size_t>("d_dim", it->second);
  const LossKind kind = cfg.objective == Objective::mlgan_clipping ? LossKind::clipping
                        : center                                  ? LossKind::center_penalty
                                                                  : LossKind::vanilla;
  t.variant = LossVariant::defaults(kind, t.d_dim);

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"variant", [](auto&, auto&) {}},
      {"d_dim", [](auto&, auto&) {}},
      {"lambda", [&](auto& k, auto& v) { t.variant.lambda = parse_real(k, v); }},
      {"beta", [&](auto& k, auto& v) { t.variant.beta = parse_real(k, v); }},
      {"mu_data", [&](auto& k, auto& v) { t.variant.mu_data = parse_reals(k, v); }},
      {"mu_g", [&](auto& k, auto& v) { t.variant.mu_g = parse_reals(k, v); }},
      {"clip_c", [&](auto& k, auto& v) { t.clip_c = parse_real(k, v); }},
      {"normalize", [&](auto& k, auto& v) { t.pairs.normalize = parse_bool(k, v); }},
      {"inter_pairs",
       [&](auto& k, auto& v) {
         if (v == "index_matched")
           t.pairs.inter = InterPairing::index_matched;
         else if (v == "full_cross")
           t.pairs.inter = InterPairing::full_cross;
         else
           throw ConfigError("'" + k + "': expected index_matched or full_cross");
       }},
      {"m", [&](auto& k, auto& v) { t.m = parse_number<std::size_t>(k, v); }},
      {"n_critic", [&](auto& k, auto& v) { t.n_critic = parse_number<std::size_t>(k, v); }},
      {"alpha", [&](auto& k, auto& v) { t.adam.alpha = parse_real(k, v); }},
      {"beta1", [&](auto& k, auto& v) { t.adam.beta1 = parse_real(k, v); }},
      {"beta2", [&](auto& k, auto& v) { t.adam.beta2 = parse_real(k, v); }},
      {"epsilon", [&](auto& k, auto& v) { t.adam.epsilon = parse_real(k, v); }},
      {"z_dim", [&](auto& k, auto& v) { t.z_dim = parse_number<std::size_t>(k, v); }},
      {"hidden_width", [&](auto& k, auto& v) { t.hidden_width = parse_number<std::size_t>(k, v); }},
      {"hidden_layers", [&](auto& k, auto& v) { t.hidden_layers = parse_number<std::size_t>(k, v); }},
      {"total_gen_iters", [&](auto& k, auto& v) { t.total_gen_iters = parse_number<std::uint64_t>(k, v); }},
      {"eval_every", [&](auto& k, auto& v) { t.eval_every = parse_number<std::uint64_t>(k, v); }},
      {"checkpoint_every", [&](auto& k, auto& v) { cfg.checkpoint_every = parse_number<std::uint64_t>(k, v); }},
      {"seed", [&](auto& k, auto& v) { cfg.seeds = {parse_number<std::uint64_t>(k, v)}; }},
      {"seeds",
       [&](auto& k, auto& v) {
         cfg.seeds.clear();
         for (const auto& s : split_list(v)) cfg.seeds.push_back(parse_number<std::uint64_t>(k, s));
       }},
      {"dataset",
       [&](auto& k, auto& v) {
         if (v == "ring")
           cfg.dataset = DatasetKind::ring;
         else if (v == "image_grid")
           cfg.dataset = DatasetKind::image_grid;
         else
           throw ConfigError("'" + k + "': expected ring or image_grid");
       }},
      {"ring_modes", [&](auto& k, auto& v) { cfg.ring_modes = parse_number<std::size_t>(k, v); }},
      {"ring_radius", [&](auto& k, auto& v) { cfg.ring_radius = parse_real(k, v); }},
      {"ring_sigma", [&](auto& k, auto& v) { cfg.ring_sigma = parse_real(k, v); }},
      {"image_grid_path", [&](auto&, auto& v) { cfg.image_grid_path = v; }},
      {"output_dir", [&](auto&, auto& v) { cfg.output_dir = v; }},
      {"eval_samples", [&](auto& k, auto& v) { cfg.eval_samples = parse_number<std::size_t>(k, v); }},
      {"mmd_samples", [&](auto& k, auto& v) { cfg.mmd_samples = parse_number<std::size_t>(k, v); }},
      {"mmd_bandwidth", [&](auto& k, auto& v) { cfg.mmd_bandwidth = parse_real(k, v); }},
      {"coverage_radius", [&](auto& k, auto& v) { cfg.coverage_radius = parse_real(k, v); }},
      {"classifier_train", [&](auto& k, auto& v) { cfg.classifier_train = parse_number<std::size_t>(k, v); }},
      {"classifier_seed", [&](auto& k, auto& v) { cfg.classifier_seed = parse_number<std::uint64_t>(k, v); }},
      {"threads", [&](auto& k, auto& v) { cfg.threads = parse_number<int>(k, v); }},
  };

  for (const auto& [key, value] : values) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second(key, value);
  }

  if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
  std::set<std::uint64_t> unique(cfg.seeds.begin(), cfg.seeds.end());
  if (unique.size() != cfg.seeds.size()) throw ConfigError("seeds contains duplicates");
  if (cfg.dataset == DatasetKind::ring) {
    if (cfg.ring_modes < 2) throw ConfigError("ring_modes must be at least 2");
    if (!(cfg.ring_sigma > 0.0) || !(cfg.ring_radius > 0.0)) throw ConfigError("ring radius and sigma must be positive");
    t.data_dim = 2;
  } else if (cfg.image_grid_path.empty()) {
    throw ConfigError("dataset = image_grid requires image_grid_path");
  }
  if (cfg.eval_samples < 2 || cfg.mmd_samples < 2) throw ConfigError("eval_samples and mmd_samples must be at least 2");
  if (!(cfg.mmd_bandwidth > 0.0)) throw ConfigError("mmd_bandwidth must be positive");
  t.seed = cfg.seeds.front();
  t.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "'");
  return parse_config(in, overrides);
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  const TrainConfig& t = train;
  std::map<std::string, std::string> out = {
      {"variant", objective_name(objective)},
      {"d_dim", std::to_string(t.d_dim)},
      {"lambda", real_text(t.variant.lambda)},
      {"beta", real_text(t.variant.beta)},
      {"mu_data", join(t.variant.mu_data)},
      {"mu_g", join(t.variant.mu_g)},
      {"clip_c", real_text(t.clip_c)},
      {"normalize", t.pairs.normalize ? "true" : "false"},
      {"inter_pairs", t.pairs.inter == InterPairing::full_cross ? "full_cross" : "index_matched"},
      {"m", std::to_string(t.m)},
      {"n_critic", std::to_string(t.n_critic)},
      {"alpha", real_text(t.adam.alpha)},
      {"beta1", real_text(t.adam.beta1)},
      {"beta2", real_text(t.adam.beta2)},
      {"epsilon", real_text(t.adam.epsilon)},
      {"z_dim", std::to_string(t.z_dim)},
      {"hidden_width", std::to_string(t.hidden_width)},
      {"hidden_layers", std::to_string(t.hidden_layers)},
      {"total_gen_iters", std::to_string(t.total_gen_iters)},
      {"eval_every", std::to_string(t.eval_every)},
      {"checkpoint_every", std::to_string(checkpoint_every)},
      {"dataset", dataset == DatasetKind::ring ? "ring" : "image_grid"},
      {"ring_modes", std::to_string(ring_modes)},
      {"ring_radius", real_text(ring_radius)},
      {"ring_sigma", real_text(ring_sigma)},
      {"output_dir", output_dir.string()},
      {"eval_samples", std::to_string(eval_samples)},
      {"mmd_samples", std::to_string(mmd_samples)},
      {"mmd_bandwidth", real_text(mmd_bandwidth)},
      {"coverage_radius", real_text(coverage_radius)},
      {"classifier_train", std::to_string(classifier_train)},
      {"classifier_seed", std::to_string(classifier_seed)},
      {"threads", std::to_string(threads)},
  };
  if (dataset == DatasetKind::image_grid) out["image_grid_path"] = image_grid_path.string();
  std::string seed_list;
  for (std::size_t i = 0; i < seeds.size(); ++i) seed_list += (i ? "," : "") + std::to_string(seeds[i]);
  out["seeds"] = seed_list;
  return out;
}

}  // namespace mlgan
