#include "capnet/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "capnet/csv.hpp"
#include "capnet/error.hpp"

namespace capnet {

namespace {

std::string join_ids(const std::vector<CapabilityId>& ids) {
  std::vector<std::string> s;
  s.reserve(ids.size());
  for (const auto& id : ids) s.push_back(id.str());
  return fmt::format("{}", fmt::join(s, ", "));
}

int parse_int(std::string_view text, std::string_view what) {
  int v = 0;
  try {
    std::size_t pos = 0;
    v = std::stoi(std::string(text), &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ParseError(fmt::format("{} '{}' is not an integer", what, text));
  }
  return v;
}

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::pre_rehab: return "pre_rehab";
    case Phase::post_rehab: return "post_rehab";
    case Phase::unspecified: return "unspecified";
  }
  return "unspecified";
}

Phase parse_phase(std::string_view text) {
  if (text == "pre_rehab" || text == "pre") return Phase::pre_rehab;
  if (text == "post_rehab" || text == "post") return Phase::post_rehab;
  if (text == "unspecified" || text.empty()) return Phase::unspecified;
  throw ParseError(fmt::format("unknown phase '{}'", text));
}

std::optional<Quantification> Profile::get(const CapabilityId& id) const {
  auto it = values.find(id);
  return it == values.end() ? std::nullopt : it->second;
}

std::vector<CapabilityId> Profile::missing(const std::vector<CapabilityId>& ids) const {
  std::vector<CapabilityId> out;
  for (const auto& id : ids)
    if (!get(id)) out.push_back(id);
  return out;
}

int RequirementSet::total() const {
  int sum = 0;
  for (const auto& [id, q] : requirements) sum += q.value();
  return sum;
}

std::vector<CapabilityId> RequirementSet::ids() const {
  std::vector<CapabilityId> out;
  for (const auto& [id, q] : requirements) out.push_back(id);
  return out;
}

void ProfileDataset::validate_unique() const {
  std::set<std::pair<std::string, Phase>> seen;
  for (const auto& p : profiles)
    if (!seen.emplace(p.agent_id, p.phase).second)
      throw ParseError(
          fmt::format("duplicate profile for agent '{}' phase {}", p.agent_id, to_string(p.phase)));
}

void ProfileDataset::validate_ids(const CapabilityCatalog& catalog) const {
  for (const auto& id : columns)
    if (!catalog.knows(id)) throw ParseError(fmt::format("capability {} is not in the catalog", id.str()));
  for (const auto& p : profiles)
    for (const auto& [id, q] : p.values)
      if (!catalog.knows(id))
        throw ParseError(fmt::format("profile '{}': capability {} is not in the catalog", p.agent_id, id.str()));
}

Profile propagate_main_level(const Profile& profile, const CapabilityCatalog& catalog) {
  Profile out = profile;
  std::map<CapabilityId, int> minima;
  for (const auto& [id, q] : profile.values) {
    if (!id.is_detail() || !q || !catalog.contains(id)) continue;
    const auto main = id.main_level();
    auto [it, inserted] = minima.emplace(main, q->value());
    if (!inserted) it->second = std::min(it->second, q->value());
  }
  for (const auto& [main, v] : minima) out.values[main] = Quantification(v);
  return out;
}

double profile_std(const Profile& profile, const std::vector<CapabilityId>& ids) {
  const auto absent = profile.missing(ids);
  if (!absent.empty())
    throw MissingDataError(
        fmt::format("profile '{}' is missing {}", profile.agent_id, join_ids(absent)));
  if (ids.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& id : ids) mean += profile.get(id)->value();
  mean /= static_cast<double>(ids.size());
  double ss = 0.0;
  for (const auto& id : ids) {
    const double d = profile.get(id)->value() - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(ids.size()));
}

ProfileDataset filter_profiles(const ProfileDataset& dataset, const std::vector<CapabilityId>& ids,
                               double threshold) {
  if (threshold < 0.0) throw ConfigError("filter threshold must be non-negative");
  ProfileDataset out;
  out.columns = dataset.columns;
  out.provenance = dataset.provenance;
  for (const auto& p : dataset.profiles) {
    if (!p.complete_over(ids)) continue;
    if (profile_std(p, ids) >= threshold) out.profiles.push_back(p);
  }
  return out;
}

ProfileDataset select_phase(const ProfileDataset& dataset, std::optional<Phase> phase) {
  ProfileDataset out;
  out.columns = dataset.columns;
  out.provenance = dataset.provenance;
  for (const auto& p : dataset.profiles)
    if (!phase || p.phase == *phase) out.profiles.push_back(p);
  return out;
}

void GeneratorConfig::validate() const {
  if (count < 0 || extra_pre < 0) throw ConfigError("sample counts must be non-negative");
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(within_main_correlation))
    throw ConfigError("within-main correlation must lie in [0, 1]");
  if (!unit(cross_main_share)) throw ConfigError("cross-main share must lie in [0, 1]");
  if (!unit(degenerate_fraction)) throw ConfigError("degenerate fraction must lie in [0, 1]");
  if (!unit(rehab_gain)) throw ConfigError("rehab gain probability must lie in [0, 1]");
  if (!(base_sd >= 0.0)) throw ConfigError("base standard deviation must be non-negative");
}

namespace {

class ProfileSampler {
 public:
  ProfileSampler(const GeneratorConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
    for (const auto& id : cfg.ids) {
      const auto main = id.main_level();
      auto it = std::find(mains_.begin(), mains_.end(), main);
      group_.push_back(static_cast<std::size_t>(it - mains_.begin()));
      if (it == mains_.end()) mains_.push_back(main);
    }
  }

  /// Post-rehabilitation scores and the matching pre scores.
  std::pair<std::vector<int>, std::vector<int>> draw_pair() {
    const double general = normal_(rng_);
    std::vector<double> main_latent(mains_.size());
    std::vector<int> gain(mains_.size());
    for (std::size_t k = 0; k < mains_.size(); ++k) {
      main_latent[k] = std::sqrt(cfg_.cross_main_share) * general +
                       std::sqrt(1.0 - cfg_.cross_main_share) * normal_(rng_);
      gain[k] = coin_(rng_) < cfg_.rehab_gain ? 1 : 0;
    }
    std::vector<int> post(cfg_.ids.size()), pre(cfg_.ids.size());
    for (std::size_t j = 0; j < cfg_.ids.size(); ++j) {
      const double latent = std::sqrt(cfg_.within_main_correlation) * main_latent[group_[j]] +
                            std::sqrt(1.0 - cfg_.within_main_correlation) * normal_(rng_);
      post[j] = clamp_score(cfg_.base_mean + cfg_.base_sd * latent);
      pre[j] = std::max(Quantification::kMin, post[j] - gain[group_[j]]);
    }
    return {post, pre};
  }

  Profile make(std::string agent, Phase phase, const std::vector<int>& scores) {
    Profile p;
    p.agent_id = std::move(agent);
    p.phase = phase;
    for (std::size_t j = 0; j < cfg_.ids.size(); ++j) p.values[cfg_.ids[j]] = Quantification(scores[j]);
    if (cfg_.ids.empty() || coin_(rng_) >= cfg_.degenerate_fraction) return p;
    if (coin_(rng_) < 0.5) {
      const int constant = clamp_score(cfg_.base_mean + (coin_(rng_) < 0.5 ? -0.5 : 0.5));
      for (auto& [id, q] : p.values) q = Quantification(constant);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, cfg_.ids.size() - 1);
      std::uniform_int_distribution<int> holes(1, 3);
      for (int h = holes(rng_); h > 0; --h) p.values[cfg_.ids[pick(rng_)]] = std::nullopt;
    }
    return p;
  }

 private:
  static int clamp_score(double v) {
    return std::clamp(static_cast<int>(std::lround(v)), Quantification::kMin, Quantification::kMax);
  }

  const GeneratorConfig& cfg_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> coin_{0.0, 1.0};
  std::vector<CapabilityId> mains_;
  std::vector<std::size_t> group_;
};

}  // namespace

ProfileDataset generate_synthetic_profiles(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  ProfileDataset out;
  out.columns = config.ids;
  std::sort(out.columns.begin(), out.columns.end());
  out.columns.erase(std::unique(out.columns.begin(), out.columns.end()), out.columns.end());
  GeneratorConfig cfg = config;
  cfg.ids = out.columns;
  out.provenance = fmt::format("synthetic seed={} count={} extra_pre={}", seed, cfg.count, cfg.extra_pre);

  ProfileSampler sampler(cfg, seed);
  const auto total = cfg.count + cfg.extra_pre;
  for (std::int64_t a = 0; a < total; ++a) {
    const auto agent = fmt::format("A{:05d}", a + 1);
    auto [post, pre] = sampler.draw_pair();
    out.profiles.push_back(sampler.make(agent, Phase::pre_rehab, pre));
    if (a < cfg.count) out.profiles.push_back(sampler.make(agent, Phase::post_rehab, post));
  }
  return out;
}

ProfileDataset read_dataset(std::istream& in, std::string_view source_name) {
  const auto doc = csv::parse(in, source_name);
  if (doc.header.size() < 2 || doc.header[0] != "agent_id" || doc.header[1] != "phase")
    throw ParseError(fmt::format("{}: header must start with agent_id,phase", source_name));
  ProfileDataset out;
  for (std::size_t c = 2; c < doc.header.size(); ++c) {
    try {
      out.columns.push_back(CapabilityId::parse(doc.header[c]));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}: header column {}: {}", source_name, c + 1, e.what()));
    }
  }
  for (const auto& c : doc.comments)
    if (c.rfind("# provenance: ", 0) == 0) out.provenance = c.substr(14);
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& row = doc.rows[r];
    Profile p;
    try {
      p.agent_id = row[0];
      p.phase = parse_phase(row[1]);
      for (std::size_t c = 2; c < row.size(); ++c) {
        const auto& cell = row[c];
        p.values[out.columns[c - 2]] =
            cell.empty() ? std::nullopt : std::optional(Quantification(parse_int(cell, "score")));
      }
    } catch (const Error& e) {
      throw ParseError(fmt::format("{}:{}: {}", source_name, doc.lines[r], e.what()));
    }
    out.profiles.push_back(std::move(p));
  }
  out.validate_unique();
  return out;
}

ProfileDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return read_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const ProfileDataset& dataset) {
  if (!dataset.provenance.empty()) out << "# provenance: " << dataset.provenance << '\n';
  csv::Row header{"agent_id", "phase"};
  for (const auto& id : dataset.columns) header.push_back(id.str());
  csv::write_row(out, header);
  for (const auto& p : dataset.profiles) {
    csv::Row row{p.agent_id, std::string(to_string(p.phase))};
    for (const auto& id : dataset.columns) {
      const auto q = p.get(id);
      row.push_back(q ? std::to_string(q->value()) : std::string());
    }
    csv::write_row(out, row);
  }
}

RequirementSet read_requirements(std::istream& in, std::string action_id, std::string_view source_name) {
  const auto doc = csv::parse(in, source_name);
  const auto id_col = doc.column("capability_id");
  const auto level_col = doc.column("level");
  RequirementSet out;
  out.action_id = std::move(action_id);
  for (const auto& c : doc.comments)
    if (c.rfind("# action: ", 0) == 0) out.action_id = c.substr(10);
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    try {
      const auto id = CapabilityId::parse(doc.rows[r][id_col]);
      if (!out.requirements.emplace(id, Quantification(parse_int(doc.rows[r][level_col], "level"))).second)
        throw ParseError(fmt::format("duplicate requirement for {}", id.str()));
    } catch (const Error& e) {
      throw ParseError(fmt::format("{}:{}: {}", source_name, doc.lines[r], e.what()));
    }
  }
  return out;
}

RequirementSet read_requirements(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return read_requirements(in, path.stem().string(), path.string());
}

void write_requirements(std::ostream& out, const RequirementSet& requirements) {
  if (!requirements.action_id.empty()) out << "# action: " << requirements.action_id << '\n';
  out << "capability_id,level\n";
  for (const auto& [id, q] : requirements.requirements) out << id.str() << ',' << q.value() << '\n';
}

}  // namespace capnet
