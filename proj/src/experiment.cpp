#include "stochmetric/experiment.hpp"

#include <boost/crc.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "stochmetric/deviation_dynamics.hpp"
#include "stochmetric/errors.hpp"
#include "stochmetric/probability_model.hpp"
#include "stochmetric/random.hpp"

namespace stochmetric {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) text_ << (i ? "," : "") << header[i];
    text_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) text_ << (i ? "," : "") << format_double(values[i]);
    text_ << '\n';
  }
  std::string str() const { return text_.str(); }

 private:
  std::ostringstream text_;
};

// All writes for one run go through here, one file at a time.
class OutputSink {
 public:
  explicit OutputSink(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    const fs::path file = dir_ / name;
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw IoError("cannot write " + file.string());
    files_.push_back({name, static_cast<std::uintmax_t>(content.size()), crc_of(content)});
  }

  void write_json(const std::string& name, const json& value) { write(name, value.dump(2) + "\n"); }

  const std::vector<OutputFile>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

  static std::uint32_t crc_of(const std::string& content) {
    boost::crc_32_type crc;
    crc.process_bytes(content.data(), content.size());
    return crc.checksum();
  }

 private:
  fs::path dir_;
  std::vector<OutputFile> files_;
};

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".stochmetric_write_probe";
  {
    std::ofstream out(probe, std::ios::trunc);
    out << "probe";
    out.close();
    if (!out) throw IoError("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

json config_echo(const ExperimentConfig& config) {
  std::vector<std::string> errors;
  const IniDocument doc = IniDocument::parse(serialize(config), errors);
  json out = json::object();
  for (const auto& [section, entries] : doc.sections())
    for (const auto& [key, value] : entries) out[section][key] = value;
  return out;
}

const char* to_string(PhaseConvention c) {
  return c == PhaseConvention::SOver2S0 ? "S_over_2S0" : "S_over_S0";
}

void run_background_statistics(const ExperimentConfig& config, OutputSink& sink) {
  const ModeEnsemble ens = generate_background(config.background, config.seed);

  std::vector<std::string> header{"index", "k0", "k1", "k2", "k3", "phase"};
  const char* names[10] = {"e00", "e01", "e02", "e03", "e11", "e12", "e13", "e22", "e23", "e33"};
  for (const char* n : names) {
    header.push_back(std::string(n) + "_re");
    header.push_back(std::string(n) + "_im");
  }
  Csv modes(header);
  double worst_gauge = 0.0, worst_null = 0.0;
  for (std::size_t j = 0; j < ens.modes.size(); ++j) {
    const auto& m = ens.modes[j];
    std::vector<double> row{static_cast<double>(j), m.wavevector[0], m.wavevector[1],
                            m.wavevector[2], m.wavevector[3], m.phase};
    for (int i = 0; i < 10; ++i) {
      row.push_back(m.polarization.packed()[i].real());
      row.push_back(m.polarization.packed()[i].imag());
    }
    modes.row(row);
    worst_gauge = std::max(worst_gauge, relative_gauge_residual(m));
    worst_null = std::max(worst_null, relative_null_residual(m));
  }
  sink.write("modes.csv", modes.str());

  const auto& st = config.statistics;
  Rng rng(substream_seed(config.seed, 0));
  Eigen::Matrix<double, 10, 1> mean_square = Eigen::Matrix<double, 10, 1>::Zero();
  double strain_square = 0.0;
  int over_bound = 0;
  for (int i = 0; i < st.sample_points; ++i) {
    SpacetimePoint p;
    p.t = rng.uniform(0.0, st.time_span);
    p.x = rng.uniform(-st.box, st.box);
    p.y = rng.uniform(-st.box, st.box);
    p.z = rng.uniform(-st.box, st.box);
    const SymTensor4d h = evaluate_perturbation(ens, p);
    mean_square += h.packed().cwiseAbs2();
    double s = 0.0;
    for (int a = 1; a < 4; ++a)
      for (int b = 1; b < 4; ++b) s += h(a, b) * h(a, b);
    strain_square += 0.5 * s;
    over_bound += h.max_abs() > config.background.linearization_bound ? 1 : 0;
  }
  mean_square /= st.sample_points;

  json rms = json::object();
  for (int i = 0; i < 10; ++i) rms[std::string("h") + (names[i] + 1)] = std::sqrt(mean_square[i]);
  const double rms_strain = std::sqrt(strain_square / st.sample_points);
  json stats{{"mode_count", ens.modes.size()},
             {"seed", config.seed},
             {"strain_rms", config.background.strain_rms},
             {"sample_points", st.sample_points},
             {"rms_components", rms},
             {"rms_strain", rms_strain},
             {"h11_rms_over_strain_rms",
              config.background.strain_rms > 0.0
                  ? std::sqrt(mean_square[SymTensor4d::index(1, 1)]) / config.background.strain_rms
                  : 0.0},
             {"max_relative_gauge_residual", worst_gauge},
             {"max_relative_null_residual", worst_null},
             {"samples_over_linearization_bound", over_bound}};
  sink.write_json("statistics.json", stats);
}

void run_deviation_trajectory(const ExperimentConfig& config, OutputSink& sink) {
  const ModeEnsemble ens = generate_background(config.background, config.seed);
  const auto& dv = config.deviation;
  DeviationState initial;
  initial.ell = Eigen::Vector3d(dv.ell[0], dv.ell[1], dv.ell[2]);
  initial.ell_dot = Eigen::Vector3d(dv.ell_dot[0], dv.ell_dot[1], dv.ell_dot[2]);
  const auto states = integrate_deviation(initial, ensemble_curvature_source(ens, dv.origin),
                                          ens.c(), dv.dt, dv.steps);

  Csv traj({"tau", "ell_x", "ell_y", "ell_z", "ell_dot_x", "ell_dot_y", "ell_dot_z"});
  double max_rel = 0.0;
  const double ell0 = initial.ell.norm();
  for (const auto& s : states) {
    traj.row({s.tau, s.ell.x(), s.ell.y(), s.ell.z(), s.ell_dot.x(), s.ell_dot.y(), s.ell_dot.z()});
    if (ell0 > 0.0) max_rel = std::max(max_rel, (s.ell - initial.ell).norm() / ell0);
  }
  sink.write("trajectory.csv", traj.str());

  const double t_final = dv.steps * dv.dt;
  const auto phases = phase_accumulation(ens, dv.origin, t_final);
  Csv ph({"mode", "omega", "phase", "unstable"});
  int unstable = 0;
  for (std::size_t j = 0; j < phases.size(); ++j) {
    ph.row({static_cast<double>(j), phases[j].omega, phases[j].phase,
            phases[j].unstable ? 1.0 : 0.0});
    unstable += phases[j].unstable ? 1 : 0;
  }
  sink.write("phases.csv", ph.str());

  const auto& last = states.back();
  sink.write_json("summary.json",
                  json{{"steps", dv.steps},
                       {"dt", dv.dt},
                       {"final_tau", last.tau},
                       {"final_ell", {last.ell.x(), last.ell.y(), last.ell.z()}},
                       {"max_relative_separation_change", max_rel},
                       {"unstable_modes", unstable},
                       {"mode_count", phases.size()}});
}

WaveFunctionGrid initial_grid(const ExperimentConfig& config) {
  const auto& g = config.grid;
  const ProbabilityModel model(config.probability.mass, config.probability.sigma,
                               config.probability.timescale);
  WaveFunctionGrid w;
  w.shape = g.dims == 1 ? make_line(g.cells, g.half_length, g.boundary)
                        : make_square(g.cells, g.half_length, g.boundary);
  w.mass = model.mass();
  w.S0 = model.S0();
  w.convention = g.convention;
  w.U = g.harmonic_omega > 0.0 ? harmonic_potential(w.shape, w.mass, g.harmonic_omega)
                               : Eigen::VectorXd::Zero(w.shape.size());
  switch (g.initial) {
    case InitialState::Gaussian:
      w.psi = gaussian_packet(w.shape, g.packet_width, g.packet_momentum, g.packet_centre);
      break;
    case InitialState::PlaneWave:
      w.psi = plane_wave(w.shape, g.packet_momentum);
      break;
    case InitialState::HarmonicGround:
      if (!(g.harmonic_omega > 0.0))
        throw ConfigError("grid.harmonic_omega: must be > 0 for initial = harmonic_ground");
      w.psi = gaussian_packet(w.shape, std::sqrt(w.hbar_eff() / (2.0 * w.mass * g.harmonic_omega)),
                              0.0, 0.0);
      break;
  }
  return w;
}

std::string snapshot_csv(const WaveFunctionGrid& w) {
  const MadelungPair m = madelung_decompose(w);
  std::vector<std::string> header{"x"};
  if (w.shape.dims == 2) header.push_back("y");
  for (const char* c : {"re_psi", "im_psi", "a", "S"}) header.push_back(c);
  Csv csv(header);
  for (Eigen::Index i = 0; i < w.psi.size(); ++i) {
    std::vector<double> row{w.shape.x(i)};
    if (w.shape.dims == 2) row.push_back(w.shape.y(i));
    row.insert(row.end(), {w.psi[i].real(), w.psi[i].imag(), m.a[i], m.S[i]});
    csv.row(row);
  }
  return csv.str();
}

json probability_report(const ExperimentConfig& config) {
  const ProbabilityModel model(config.probability.mass, config.probability.sigma,
                               config.probability.timescale);
  const double s = model.sigma();
  json levels = json::array();
  for (int k = 0; k <= 6; ++k)
    levels.push_back({{"delta_ell_over_sigma", k}, {"probability", interval_probability(k * s, s)}});
  const std::vector<IntervalTriple> triples{
      {0.0, 0.0, 0.0}, {s, s, s}, {s, s, 2 * s}, {0.5 * s, 0.5 * s, 0.8 * s}, {3 * s, 3 * s, 6 * s}};
  const AxiomReport report = check_probability_axioms(s, triples);
  json rows = json::array();
  for (const auto& t : report.triples)
    rows.push_back({{"d21", t.triple.d21}, {"d32", t.triple.d32}, {"d31", t.triple.d31},
                    {"p21", t.p21}, {"p32", t.p32}, {"p31", t.p31},
                    {"literal_inequality_holds", t.literal_inequality_holds},
                    {"monotone", t.monotone}});
  return json{{"sigma", s},
              {"mass", model.mass()},
              {"timescale", model.timescale()},
              {"S0", model.S0()},
              {"amplitude_prefactor", amplitude_prefactor(s)},
              {"interval_probability", levels},
              {"axiom1_unit_at_zero", report.unit_at_zero},
              {"axiom2_vanishes_at_infinity", report.vanishes_at_infinity},
              {"axiom3_triples", rows},
              {"axiom3_literal_failures", report.literal_failures},
              {"monotonicity_failures", report.monotonicity_failures}};
}

void run_derivation_gap(const ExperimentConfig& config, OutputSink& sink) {
  const auto& g = config.grid;
  const WaveFunctionGrid initial = initial_grid(config);
  const DerivationGapReport report =
      derivation_gap_report(initial, g.steps, g.dt, g.sample_every, g.interior_threshold);
  const WaveFunctionGrid final_state = evolve(initial, g.dt, g.steps);

  sink.write("snapshot_initial.csv", snapshot_csv(initial));
  sink.write("snapshot_final.csv", snapshot_csv(final_state));

  json records = json::array();
  for (const auto& r : report.records)
    records.push_back({{"step", r.step},
                       {"t", r.t},
                       {"max_continuity_residual", r.max_continuity},
                       {"max_hj_residual", r.max_hj},
                       {"max_hj_plus_q", r.max_hj_plus_q},
                       {"max_quantum_potential", r.max_q},
                       {"interior_cells", r.interior_cells}});
  sink.write_json("gap_report.json",
                  json{{"convention", to_string(report.convention)},
                       {"interior_threshold", report.interior_threshold},
                       {"norm_initial", initial.norm()},
                       {"norm_final", final_state.norm()},
                       {"worst_continuity_residual", report.worst_continuity},
                       {"worst_hj_plus_q", report.worst_hj_plus_q},
                       {"max_quantum_potential", report.max_q},
                       {"worst_relative_gap", report.worst_relative_gap},
                       {"records", records}});
  sink.write_json("probability_report.json", probability_report(config));
}

std::vector<std::uint64_t> run_double_slit(const ExperimentConfig& config, OutputSink& sink) {
  const InterferenceResult result = monte_carlo_pattern(config.double_slit());
  const Eigen::VectorXd baseline = screen_intensity(config.geometry, config.beam, nullptr);

  Csv pattern({"x", "mean_I", "stderr_I"});
  Csv base({"x", "I"});
  for (std::size_t i = 0; i < result.positions.size(); ++i) {
    pattern.row({result.positions[i], result.mean_intensity[i], result.standard_error[i]});
    base.row({result.positions[i], baseline[static_cast<Eigen::Index>(i)]});
  }
  sink.write("pattern.csv", pattern.str());
  sink.write("baseline.csv", base.str());

  const auto [begin, end] = central_fringe_window(config.geometry, config.beam.wavelength);
  const std::vector<double> base_vec(baseline.data(), baseline.data() + baseline.size());
  sink.write_json(
      "result.json",
      json{{"config", config_echo(config)},
           {"seed", result.seed},
           {"realizations", result.realizations},
           {"visibility", result.visibility},
           {"visibility_stderr", result.visibility_stderr},
           {"baseline_visibility", fringe_visibility(base_vec, begin, end)},
           {"fringe_window", {begin, end}},
           {"coupling", to_string(result.coupling)},
           {"amplitude_coupling_active", result.coupling != Coupling::Phase},
           {"phase_coupling_active", result.coupling != Coupling::Amplitude},
           {"strain_exceeds_linearization_bound",
            config.background.strain_rms > config.background.linearization_bound}});
  return result.substream_seeds;
}

}  // namespace

fs::path resolve_output_dir(const ExperimentConfig& config) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return config.output_dir;
}

std::uint32_t file_crc32(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return OutputSink::crc_of(content);
}

RunManifest run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, resolve_output_dir(config));
}

RunManifest run_experiment(const ExperimentConfig& config, const fs::path& dir) {
  prepare_output_dir(dir);

  RunManifest manifest;
  manifest.config_text = serialize(config);
  manifest.output_dir = dir;
  manifest.started = utc_now();

  OutputSink sink(dir);
  switch (config.kind) {
    case ExperimentKind::BackgroundStatistics: run_background_statistics(config, sink); break;
    case ExperimentKind::DeviationTrajectory: run_deviation_trajectory(config, sink); break;
    case ExperimentKind::DerivationGap: run_derivation_gap(config, sink); break;
    case ExperimentKind::DoubleSlit: manifest.substream_seeds = run_double_slit(config, sink); break;
  }
  manifest.outputs = sink.files();
  manifest.finished = utc_now();

  json outputs = json::array();
  for (const auto& f : manifest.outputs)
    outputs.push_back({{"name", f.name}, {"bytes", f.bytes}, {"crc32", f.crc32}});
  const json doc{{"version", manifest.version},
                 {"experiment", to_string(config.kind)},
                 {"seed", config.seed},
                 {"started", manifest.started},
                 {"finished", manifest.finished},
                 {"config", config_echo(config)},
                 {"config_text", manifest.config_text},
                 {"substream_seeds", manifest.substream_seeds},
                 {"outputs", outputs}};
  const fs::path tmp = dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump(2) << '\n';
    out.close();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, dir / "manifest.json", ec);
  if (ec) throw IoError("cannot finalize manifest.json: " + ec.message());
  return manifest;
}

}  // namespace stochmetric
