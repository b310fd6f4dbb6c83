#include "stochmetric/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>

#include "stochmetric/errors.hpp"

namespace stochmetric {

namespace {

enum KindBit : unsigned {
  kStats = 1u << 0,
  kTrajectory = 1u << 1,
  kGap = 1u << 2,
  kSlit = 1u << 3,
  kAll = kStats | kTrajectory | kGap | kSlit,
};

unsigned bit_of(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::BackgroundStatistics: return kStats;
    case ExperimentKind::DeviationTrajectory: return kTrajectory;
    case ExperimentKind::DerivationGap: return kGap;
    case ExperimentKind::DoubleSlit: return kSlit;
  }
  return 0;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

template <typename Int>
bool parse_integer(const std::string& s, Int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

using Parser = std::function<std::optional<std::string>(ExperimentConfig&, const std::string&)>;
using Printer = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  std::string section;
  std::string key;
  Parser parse;
  Printer print;
  unsigned required_for = 0;

  std::string path() const { return section + "." + key; }
};

template <typename Get>
Field real(const char* section, const char* key, Get get, unsigned required = 0) {
  return {section, key,
          [get](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
            double d = 0.0;
            if (!parse_double(v, d)) return "expected a finite number, got '" + v + "'";
            get(c) = d;
            return std::nullopt;
          },
          [get](const ExperimentConfig& c) { return format_double(get(c)); }, required};
}

template <typename Get>
Field integer(const char* section, const char* key, Get get, unsigned required = 0) {
  return {section, key,
          [get](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
            int i = 0;
            if (!parse_integer(v, i)) return "expected an integer, got '" + v + "'";
            get(c) = i;
            return std::nullopt;
          },
          [get](const ExperimentConfig& c) { return std::to_string(get(c)); }, required};
}

template <typename Get>
Field boolean(const char* section, const char* key, Get get) {
  return {section, key,
          [get](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
            if (v == "true") get(c) = true;
            else if (v == "false") get(c) = false;
            else return "expected true or false, got '" + v + "'";
            return std::nullopt;
          },
          [get](const ExperimentConfig& c) { return std::string(get(c) ? "true" : "false"); },
          0};
}

template <typename Enum, typename Get>
Field choice(const char* section, const char* key, Get get,
             std::vector<std::pair<std::string, Enum>> names, unsigned required = 0) {
  return {section, key,
          [get, names](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
            for (const auto& [name, value] : names)
              if (name == v) {
                get(c) = value;
                return std::nullopt;
              }
            std::string allowed;
            for (const auto& n : names) allowed += (allowed.empty() ? "" : ", ") + n.first;
            return "expected one of " + allowed + ", got '" + v + "'";
          },
          [get, names](const ExperimentConfig& c) {
            for (const auto& [name, value] : names)
              if (value == get(c)) return name;
            return names.front().first;
          },
          required};
}

#define STOCHMETRIC_REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<std::pair<std::string, ExperimentKind>> kKindNames{
    {"background-statistics", ExperimentKind::BackgroundStatistics},
    {"deviation-trajectory", ExperimentKind::DeviationTrajectory},
    {"derivation-gap", ExperimentKind::DerivationGap},
    {"double-slit", ExperimentKind::DoubleSlit},
};

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back(choice<ExperimentKind>("experiment", "kind", STOCHMETRIC_REF(kind), kKindNames, kAll));
    f.push_back({"experiment", "seed",
                 [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                   if (!parse_integer(v, c.seed)) return "expected an unsigned 64-bit integer, got '" + v + "'";
                   return std::nullopt;
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }, kAll});
    f.push_back({"experiment", "output_dir",
                 [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                   c.output_dir = v;
                   return std::nullopt;
                 },
                 [](const ExperimentConfig& c) { return c.output_dir; }, 0});
    f.push_back(integer("experiment", "realizations", STOCHMETRIC_REF(realizations)));
    f.push_back(choice<bool>("experiment", "units", STOCHMETRIC_REF(geometric_units),
                             {{"si", false}, {"geometric", true}}));

    f.push_back(integer("background", "mode_count", STOCHMETRIC_REF(background.mode_count)));
    f.push_back(real("background", "strain_rms", STOCHMETRIC_REF(background.strain_rms),
                     kStats | kTrajectory | kSlit));
    f.push_back(real("background", "f_min", STOCHMETRIC_REF(background.f_min),
                     kStats | kTrajectory | kSlit));
    f.push_back(real("background", "f_max", STOCHMETRIC_REF(background.f_max),
                     kStats | kTrajectory | kSlit));
    f.push_back(real("background", "polarization_plus", STOCHMETRIC_REF(background.polarization_plus)));
    f.push_back(real("background", "polarization_cross", STOCHMETRIC_REF(background.polarization_cross)));
    f.push_back(boolean("background", "isotropic", STOCHMETRIC_REF(background.isotropic)));
    f.push_back(real("background", "linearization_bound", STOCHMETRIC_REF(background.linearization_bound)));

    f.push_back(real("geometry", "L1", STOCHMETRIC_REF(geometry.L1), kSlit));
    f.push_back(real("geometry", "L2", STOCHMETRIC_REF(geometry.L2), kSlit));
    f.push_back(real("geometry", "d", STOCHMETRIC_REF(geometry.d), kSlit));
    f.push_back(real("geometry", "w", STOCHMETRIC_REF(geometry.w)));
    f.push_back(real("geometry", "screen_half_width", STOCHMETRIC_REF(geometry.screen_half_width)));
    f.push_back(integer("geometry", "screen_samples", STOCHMETRIC_REF(geometry.screen_samples)));

    f.push_back(real("beam", "wavelength", STOCHMETRIC_REF(beam.wavelength), kSlit));
    f.push_back(real("beam", "speed", STOCHMETRIC_REF(beam.speed)));
    f.push_back(real("beam", "t_emit", STOCHMETRIC_REF(beam.t_emit)));
    f.push_back(integer("beam", "quadrature_points", STOCHMETRIC_REF(beam.quadrature_points)));
    f.push_back(choice<Coupling>("beam", "coupling", STOCHMETRIC_REF(beam.coupling),
                                 {{"amplitude", Coupling::Amplitude},
                                  {"phase", Coupling::Phase},
                                  {"both", Coupling::Both}}));

    f.push_back(real("probability", "mass", STOCHMETRIC_REF(probability.mass), kGap));
    f.push_back(real("probability", "sigma", STOCHMETRIC_REF(probability.sigma), kGap));
    f.push_back(real("probability", "timescale", STOCHMETRIC_REF(probability.timescale)));

    f.push_back(integer("grid", "cells", STOCHMETRIC_REF(grid.cells)));
    f.push_back(integer("grid", "dims", STOCHMETRIC_REF(grid.dims)));
    f.push_back(real("grid", "half_length", STOCHMETRIC_REF(grid.half_length)));
    f.push_back(choice<Boundary>("grid", "boundary", STOCHMETRIC_REF(grid.boundary),
                                 {{"periodic", Boundary::Periodic},
                                  {"hard_wall", Boundary::HardWall}}));
    f.push_back(real("grid", "dt", STOCHMETRIC_REF(grid.dt), kGap));
    f.push_back(integer("grid", "steps", STOCHMETRIC_REF(grid.steps), kGap));
    f.push_back(integer("grid", "sample_every", STOCHMETRIC_REF(grid.sample_every)));
    f.push_back(choice<InitialState>("grid", "initial", STOCHMETRIC_REF(grid.initial),
                                     {{"gaussian", InitialState::Gaussian},
                                      {"plane_wave", InitialState::PlaneWave},
                                      {"harmonic_ground", InitialState::HarmonicGround}}));
    f.push_back(real("grid", "packet_width", STOCHMETRIC_REF(grid.packet_width)));
    f.push_back(real("grid", "packet_momentum", STOCHMETRIC_REF(grid.packet_momentum)));
    f.push_back(real("grid", "packet_centre", STOCHMETRIC_REF(grid.packet_centre)));
    f.push_back(real("grid", "harmonic_omega", STOCHMETRIC_REF(grid.harmonic_omega)));
    f.push_back(choice<PhaseConvention>("grid", "convention", STOCHMETRIC_REF(grid.convention),
                                        {{"S_over_2S0", PhaseConvention::SOver2S0},
                                         {"S_over_S0", PhaseConvention::SOverS0}}));
    f.push_back(real("grid", "interior_threshold", STOCHMETRIC_REF(grid.interior_threshold)));

    f.push_back(real("deviation", "ell_x", STOCHMETRIC_REF(deviation.ell[0])));
    f.push_back(real("deviation", "ell_y", STOCHMETRIC_REF(deviation.ell[1])));
    f.push_back(real("deviation", "ell_z", STOCHMETRIC_REF(deviation.ell[2])));
    f.push_back(real("deviation", "ell_dot_x", STOCHMETRIC_REF(deviation.ell_dot[0])));
    f.push_back(real("deviation", "ell_dot_y", STOCHMETRIC_REF(deviation.ell_dot[1])));
    f.push_back(real("deviation", "ell_dot_z", STOCHMETRIC_REF(deviation.ell_dot[2])));
    f.push_back(real("deviation", "origin_t", STOCHMETRIC_REF(deviation.origin.t)));
    f.push_back(real("deviation", "origin_x", STOCHMETRIC_REF(deviation.origin.x)));
    f.push_back(real("deviation", "origin_y", STOCHMETRIC_REF(deviation.origin.y)));
    f.push_back(real("deviation", "origin_z", STOCHMETRIC_REF(deviation.origin.z)));
    f.push_back(real("deviation", "dt", STOCHMETRIC_REF(deviation.dt), kTrajectory));
    f.push_back(integer("deviation", "steps", STOCHMETRIC_REF(deviation.steps), kTrajectory));

    f.push_back(integer("statistics", "sample_points", STOCHMETRIC_REF(statistics.sample_points)));
    f.push_back(real("statistics", "box", STOCHMETRIC_REF(statistics.box)));
    f.push_back(real("statistics", "time_span", STOCHMETRIC_REF(statistics.time_span)));
    return f;
  }();
  return fields;
}

#undef STOCHMETRIC_REF

void check(std::vector<std::string>& out, bool ok, const char* path, const char* why) {
  if (!ok) out.push_back(std::string(path) + ": " + why);
}

std::vector<std::string> semantic_problems(const ExperimentConfig& c) {
  std::vector<std::string> out;
  check(out, !c.output_dir.empty(), "experiment.output_dir", "must not be empty");
  if (c.kind == ExperimentKind::DoubleSlit)
    check(out, c.realizations >= 2, "experiment.realizations", "must be >= 2");
  for (auto& p : problems(c.background)) out.push_back(p);
  for (auto& p : problems(c.geometry)) out.push_back(p);
  for (auto& p : problems(c.beam)) out.push_back(p);

  check(out, c.probability.mass > 0.0, "probability.mass", "must be > 0");
  check(out, c.probability.sigma > 0.0, "probability.sigma", "must be > 0");
  check(out, c.probability.timescale > 0.0, "probability.timescale", "must be > 0");

  const auto& g = c.grid;
  check(out, g.cells >= 8, "grid.cells", "must be >= 8");
  check(out, g.dims == 1 || g.dims == 2, "grid.dims", "must be 1 or 2");
  check(out, g.half_length > 0.0, "grid.half_length", "must be > 0");
  check(out, g.dt != 0.0, "grid.dt", "must be nonzero");
  check(out, g.steps >= 1, "grid.steps", "must be >= 1");
  check(out, g.sample_every >= 1, "grid.sample_every", "must be >= 1");
  check(out, g.packet_width > 0.0, "grid.packet_width", "must be > 0");
  check(out, g.harmonic_omega >= 0.0, "grid.harmonic_omega", "must be >= 0");
  check(out, g.interior_threshold > 0.0 && g.interior_threshold < 1.0, "grid.interior_threshold",
        "must lie in (0, 1)");

  check(out, c.deviation.dt > 0.0, "deviation.dt", "must be > 0");
  check(out, c.deviation.steps >= 0, "deviation.steps", "must be >= 0");

  check(out, c.statistics.sample_points >= 1, "statistics.sample_points", "must be >= 1");
  check(out, c.statistics.box > 0.0, "statistics.box", "must be > 0");
  check(out, c.statistics.time_span >= 0.0, "statistics.time_span", "must be >= 0");
  return out;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [name, value] : kKindNames)
    if (value == k) return name;
  return "unknown";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DoubleSlitExperiment ExperimentConfig::double_slit() const {
  return {geometry, beam, background, realizations, seed};
}

IniDocument IniDocument::parse(const std::string& text, std::vector<std::string>& errors) {
  IniDocument doc;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = "line " + std::to_string(number) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        errors.push_back(where + "malformed section header '" + t + "'");
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      doc.sections_[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value', got '" + t + "'");
      continue;
    }
    if (section.empty()) {
      errors.push_back(where + "key outside of any [section]");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    auto& entries = doc.sections_[section];
    if (entries.count(key)) {
      errors.push_back(where + "duplicate key " + section + "." + key);
      continue;
    }
    entries[key] = trim(t.substr(eq + 1));
  }
  return doc;
}

void IniDocument::set(const std::string& path, const std::string& value) {
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
    throw ConfigError(path + ": expected a 'section.key' path");
  sections_[path.substr(0, dot)][path.substr(dot + 1)] = value;
}

bool IniDocument::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

ExperimentConfig parse_config(const IniDocument& doc) {
  std::vector<std::string> errors;
  ExperimentConfig config;
  const auto& fields = schema();

  for (const auto& [section, entries] : doc.sections()) {
    const bool known_section = std::any_of(fields.begin(), fields.end(),
                                           [&](const Field& f) { return f.section == section; });
    if (!known_section) {
      errors.push_back(section + ": unknown section");
      continue;
    }
    for (const auto& [key, value] : entries) {
      const auto f = std::find_if(fields.begin(), fields.end(), [&](const Field& fd) {
        return fd.section == section && fd.key == key;
      });
      if (f == fields.end()) {
        errors.push_back(section + "." + key + ": unknown key");
        continue;
      }
      if (auto err = f->parse(config, value)) errors.push_back(f->path() + ": " + *err);
    }
  }

  if (doc.has("experiment", "kind")) {
    const bool kind_ok = std::none_of(errors.begin(), errors.end(), [](const std::string& e) {
      return e.rfind("experiment.kind:", 0) == 0;
    });
    if (kind_ok)
      for (const auto& f : fields)
        if ((f.required_for & bit_of(config.kind)) && !doc.has(f.section, f.key))
          errors.push_back(f.path() + ": missing required key");
  } else {
    errors.push_back("experiment.kind: missing required key");
    if (!doc.has("experiment", "seed")) errors.push_back("experiment.seed: missing required key");
  }

  config.background.speed_of_light = config.geometric_units ? 1.0 : kSpeedOfLightSI;
  for (auto& p : semantic_problems(config)) errors.push_back(std::move(p));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::string> errors;
  const IniDocument doc = IniDocument::parse(text, errors);
  try {
    ExperimentConfig config = parse_config(doc);
    if (errors.empty()) return config;
  } catch (const ConfigError& e) {
    errors.insert(errors.end(), e.issues.begin(), e.issues.end());
  }
  throw ConfigError(std::move(errors));
}

std::string serialize(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : schema()) {
    if (f.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
      section = f.section;
    }
    out << f.key << " = " << f.print(config) << '\n';
  }
  return out.str();
}

}  // namespace stochmetric
