#include "star/types.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace star {

std::int64_t max_tokens(const MemoryConfig& config) {
  const auto sq = [](int p) { return static_cast<std::int64_t>(p) * p; };
  return (static_cast<std::int64_t>(config.n_spa) + config.n_ret) * sq(config.p_spa) +
         static_cast<std::int64_t>(config.n_tem) * sq(config.p_tem) +
         static_cast<std::int64_t>(config.n_abs) * sq(config.p_abs);
}

std::optional<ConfigError> validate_config(const MemoryConfig& c, int input_grid) {
  const auto fail = [](std::string field, std::string msg) {
    return std::optional<ConfigError>(ConfigError{std::move(field), std::move(msg)});
  };
  const std::pair<const char*, int> positives[] = {
      {"p_spa", c.p_spa}, {"p_tem", c.p_tem}, {"p_abs", c.p_abs}, {"n_buff", c.n_buff},
      {"n_spa", c.n_spa}, {"n_tem", c.n_tem}, {"n_abs", c.n_abs}, {"n_ret", c.n_ret},
      {"dim", c.dim},     {"kmeans_max_iters", c.kmeans_max_iters},
      {"history_depth", c.history_depth},
  };
  for (const auto& [name, value] : positives) {
    if (value <= 0) return fail(name, std::string(name) + " must be positive");
  }
  if (!(c.decay_alpha > 0.0 && c.decay_alpha < 1.0))
    return fail("decay_alpha", "decay out of range: decay_alpha must lie in (0, 1)");
  if (c.n_spa > c.n_buff) return fail("n_spa", "n_spa must not exceed n_buff");
  if (c.n_ret > c.n_tem) return fail("n_ret", "n_ret must not exceed n_tem");
  if (c.p_abs > c.p_tem) return fail("p_abs", "p_abs must not exceed p_tem");
  if (c.p_tem > c.p_spa) return fail("p_tem", "p_tem must not exceed p_spa");
  if (input_grid <= 0) return fail("input_grid", "input grid must be positive");
  const std::pair<const char*, int> sides[] = {{"p_spa", c.p_spa}, {"p_tem", c.p_tem}, {"p_abs", c.p_abs}};
  for (const auto& [name, side] : sides) {
    if (input_grid % side != 0) {
      return fail(name, "pooling not exact: " + std::string(name) + "=" + std::to_string(side) +
                            " does not divide input grid " + std::to_string(input_grid));
    }
  }
  // Retrieval compares buffer entries (stored at p_spa) against centroids at p_tem.
  if (c.p_spa % c.p_tem != 0)
    return fail("p_tem", "pooling not exact: p_tem must divide p_spa");
  return std::nullopt;
}

MemoryConfig parse_config_json(const std::string& text) {
  MemoryConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error("config: expected a JSON object");
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) {
      try {
        j.at(key).get_to(field);
      } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config key '") + key + "': " + e.what());
      }
    }
  };
  get("p_spa", c.p_spa);
  get("p_tem", c.p_tem);
  get("p_abs", c.p_abs);
  get("n_buff", c.n_buff);
  get("n_spa", c.n_spa);
  get("n_tem", c.n_tem);
  get("n_abs", c.n_abs);
  get("n_ret", c.n_ret);
  get("dim", c.dim);
  get("kmeans_max_iters", c.kmeans_max_iters);
  get("decay_alpha", c.decay_alpha);
  get("rng_seed", c.rng_seed);
  get("attention_scaling", c.attention_scaling);
  get("history_depth", c.history_depth);
  if (j.contains("kmeans_init")) {
    const auto mode = j.at("kmeans_init").get<std::string>();
    if (mode == "warm") {
      c.kmeans_init = KMeansInit::kWarmStart;
    } else if (mode == "random") {
      c.kmeans_init = KMeansInit::kRandom;
    } else {
      throw Error("config key 'kmeans_init' must be \"warm\" or \"random\"");
    }
  }
  return c;
}

MemoryConfig load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

}  // namespace star
