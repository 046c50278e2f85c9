#include "qsemi/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsemi/scan.hpp"
#include "qsemi/semigroup.hpp"

namespace qsemi::cli {

namespace {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kVerifyThreshold = 1e-7;

double parse_double_strict(const std::string& text, const char* what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value))
    throw parse_error(std::string(what) + ": expected a finite number, got '" +
                      text + "'");
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(text.substr(pos));
      return parts;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
}

// RE or RE,IM
Complex parse_complex_scalar(const std::string& text, const char* what) {
  const auto parts = split(text, ',');
  if (parts.size() == 1) return Complex(parse_double_strict(parts[0], what), 0.0);
  if (parts.size() == 2)
    return Complex(parse_double_strict(parts[0], what),
                   parse_double_strict(parts[1], what));
  throw parse_error(std::string(what) + ": expected RE or RE,IM, got '" + text + "'");
}

// RE,IM,RE,IM,...
ComplexVector parse_complex_list(const std::string& text, const char* what) {
  const auto parts = split(text, ',');
  if (parts.size() < 2 || parts.size() % 2 != 0)
    throw parse_error(std::string(what) +
                      ": expected an even list RE,IM,RE,IM,... , got '" + text + "'");
  ComplexVector v(static_cast<Eigen::Index>(parts.size() / 2));
  for (std::size_t i = 0; i < parts.size(); i += 2)
    v[static_cast<Eigen::Index>(i / 2)] =
        Complex(parse_double_strict(parts[i], what),
                parse_double_strict(parts[i + 1], what));
  return v;
}

GridAxis parse_axis(const std::string& text, const char* what) {
  const auto parts = split(text, ':');
  if (parts.size() == 1) return GridAxis::single(parse_double_strict(parts[0], what));
  if (parts.size() == 3)
    return GridAxis::make(parse_double_strict(parts[0], what),
                          parse_double_strict(parts[1], what),
                          parse_double_strict(parts[2], what));
  throw parse_error(std::string(what) + ": expected START:STOP:STEP or a single value");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double finite_number_field(const njson& doc, const char* field) {
  if (!doc.contains(field))
    throw parse_error(std::string("model file: missing field \"") + field + "\"");
  const njson& v = doc.at(field);
  if (!v.is_number())
    throw parse_error(std::string("model file: field \"") + field +
                      "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    throw parse_error(std::string("model file: field \"") + field +
                      "\" must be finite");
  return x;
}

Eigen::Index integer_field(const njson& doc, const char* field) {
  if (!doc.contains(field))
    throw parse_error(std::string("model file: missing field \"") + field + "\"");
  const njson& v = doc.at(field);
  if (!v.is_number_integer())
    throw parse_error(std::string("model file: field \"") + field +
                      "\" must be an integer");
  return v.get<Eigen::Index>();
}

ojson complex_json(Complex z) { return ojson::array({z.real(), z.imag()}); }

ojson vector_json(const ComplexVector& v) {
  ojson arr = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(complex_json(v[i]));
  return arr;
}

ojson real_list_json(const RealVector& v) {
  ojson arr = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

void emit(std::ostream& out, const ojson& doc, const std::string& format) {
  if (format == "compact")
    out << doc.dump() << "\n";
  else
    out << doc.dump(2) << "\n";
}

unsigned env_thread_cap() {
  const char* raw = std::getenv("QSEMI_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  const std::string text(raw);
  unsigned value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || value < 1)
    throw precondition_error("QSEMI_THREADS must be a positive integer, got '" +
                             text + "'");
  return value;
}

struct ModelOption {
  std::string path;

  QuadraticModel load() const { return parse_model_file(read_file(path)); }
};

}  // namespace

QuadraticModel parse_model_file(const std::string& bytes) {
  njson doc;
  try {
    doc = njson::parse(bytes);
  } catch (const njson::exception& e) {
    throw parse_error(std::string("model file: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw parse_error("model file: expected a JSON object");

  const bool has_matrix = doc.contains("M");
  const bool has_builtin = doc.contains("builtin");
  if (has_matrix == has_builtin)
    throw parse_error(
        "model file: exactly one of \"M\" and \"builtin\" must be present");

  if (has_builtin) {
    const njson& b = doc.at("builtin");
    if (!b.is_string())
      throw parse_error("model file: field \"builtin\" must be a string");
    const std::string name = b.get<std::string>();
    QuadraticModel model;
    if (name == "fokker-planck") {
      model = build_fokker_planck(finite_number_field(doc, "a"));
    } else if (name == "perturbed-fokker-planck") {
      model = build_perturbed_fokker_planck(finite_number_field(doc, "a"),
                                            finite_number_field(doc, "b"));
    } else if (name == "harmonic") {
      const Eigen::Index n = integer_field(doc, "n");
      if (n < 1) throw parse_error("model file: field \"n\" must be >= 1");
      model = build_harmonic_oscillator(n);
    } else {
      throw parse_error("model file: unknown builtin \"" + name + "\"");
    }
    if (doc.contains("n") && name != "harmonic" &&
        integer_field(doc, "n") != model.n)
      throw parse_error("model file: field \"n\" does not match builtin dimension");
    return model;
  }

  const Eigen::Index n = integer_field(doc, "n");
  if (n < 1) throw parse_error("model file: field \"n\" must be >= 1");
  const njson& rows = doc.at("M");
  if (!rows.is_array() || rows.size() != static_cast<std::size_t>(n))
    throw parse_error("model file: field \"M\" must be an array of n rows");
  QuadraticModel model;
  model.n = n;
  model.m.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const njson& row = rows.at(static_cast<std::size_t>(i));
    if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
      throw parse_error("model file: row " + std::to_string(i) +
                        " of \"M\" must have n entries");
    for (Eigen::Index j = 0; j < n; ++j) {
      const njson& entry = row.at(static_cast<std::size_t>(j));
      if (!entry.is_array() || entry.size() != 2 || !entry.at(0).is_number() ||
          !entry.at(1).is_number())
        throw parse_error("model file: entry (" + std::to_string(i) + "," +
                          std::to_string(j) + ") of \"M\" must be a [re, im] pair");
      const double re = entry.at(0).get<double>();
      const double im = entry.at(1).get<double>();
      if (!std::isfinite(re) || !std::isfinite(im))
        throw parse_error("model file: entry (" + std::to_string(i) + "," +
                          std::to_string(j) + ") of \"M\" must be finite");
      model.m(i, j) = Complex(re, im);
    }
  }
  return model;
}

HermiteState parse_state_file(const std::string& bytes) {
  njson doc;
  try {
    doc = njson::parse(bytes);
  } catch (const njson::exception& e) {
    throw parse_error(std::string("state file: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw parse_error("state file: expected a JSON object");
  if (!doc.contains("n") || !doc.at("n").is_number_integer())
    throw parse_error("state file: field \"n\" must be an integer");
  const Eigen::Index n = doc.at("n").get<Eigen::Index>();
  if (n < 1) throw parse_error("state file: field \"n\" must be >= 1");
  if (!doc.contains("coefficients") || !doc.at("coefficients").is_array())
    throw parse_error("state file: field \"coefficients\" must be an array");

  struct Entry {
    MultiIndex alpha;
    Complex value;
  };
  std::vector<Entry> entries;
  std::unordered_set<MultiIndex, MultiIndexHash> seen;
  std::int64_t max_degree = 0;
  for (const njson& item : doc.at("coefficients")) {
    if (!item.is_object() || !item.contains("alpha") ||
        !item.at("alpha").is_array())
      throw parse_error("state file: each coefficient needs an \"alpha\" array");
    const njson& alpha_json = item.at("alpha");
    if (alpha_json.size() != static_cast<std::size_t>(n))
      throw parse_error("state file: an \"alpha\" entry does not have length n");
    MultiIndex alpha;
    alpha.reserve(alpha_json.size());
    for (const njson& c : alpha_json) {
      if (!c.is_number_integer() || c.get<std::int64_t>() < 0)
        throw parse_error(
            "state file: \"alpha\" components must be non-negative integers");
      alpha.push_back(c.get<std::int64_t>());
    }
    if (!seen.insert(alpha).second)
      throw parse_error("state file: duplicate \"alpha\" entry");
    if (!item.contains("re") || !item.contains("im") ||
        !item.at("re").is_number() || !item.at("im").is_number())
      throw parse_error("state file: each coefficient needs numeric \"re\" and \"im\"");
    const double re = item.at("re").get<double>();
    const double im = item.at("im").get<double>();
    if (!std::isfinite(re) || !std::isfinite(im))
      throw parse_error("state file: coefficients must be finite");
    max_degree = std::max(max_degree, degree_of(alpha));
    entries.push_back({std::move(alpha), Complex(re, im)});
  }

  std::uint64_t total = 0;
  for (std::int64_t m = 0; m <= max_degree; ++m) total += block_dimension(n, m);
  if (total > 50'000'000ULL)
    throw precondition_error("state file: truncation degree too large");

  HermiteState state = zero_state(n, std::max<std::int64_t>(max_degree, 0));
  std::vector<EnergyLevelBasis> levels;
  levels.reserve(static_cast<std::size_t>(max_degree) + 1);
  for (std::int64_t m = 0; m <= max_degree; ++m)
    levels.push_back(enumerate_level(n, m));
  for (const Entry& e : entries) {
    const std::int64_t deg = degree_of(e.alpha);
    state.blocks[static_cast<std::size_t>(deg)]
                [levels[static_cast<std::size_t>(deg)].index_of(e.alpha)] = e.value;
  }
  return state;
}

namespace {

ojson state_json(const HermiteState& state) {
  ojson coeffs = ojson::array();
  for (std::int64_t m = 0; m <= state.max_degree; ++m) {
    const EnergyLevelBasis basis = enumerate_level(state.n, m);
    const ComplexVector& block = state.blocks[static_cast<std::size_t>(m)];
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
      ojson entry;
      entry["alpha"] = basis.indices[static_cast<std::size_t>(i)];
      entry["re"] = block[i].real();
      entry["im"] = block[i].imag();
      coeffs.push_back(std::move(entry));
    }
  }
  ojson doc;
  doc["n"] = state.n;
  doc["coefficients"] = std::move(coeffs);
  return doc;
}

int cmd_classify(const QuadraticModel& model, Complex t,
                 const std::string& format, std::ostream& out) {
  const SingularSpectrum spec = singular_spectrum(model, t);
  const BoundednessClass cls = classify(spec);
  ojson doc;
  doc["t"] = complex_json(t);
  doc["sigma"] = real_list_json(spec.sigma);
  doc["class"] = to_string(cls.kind);
  doc["smoothing_exponent"] = smoothing_exponent(spec);
  emit(out, doc, format);
  return 0;
}

int cmd_spectrum(const QuadraticModel& model, const std::string& format,
                 std::ostream& out) {
  const ComplexVector eigs = eig_values(model.m);
  const EllipticityResult ell = ellipticity_check(model);
  const LongTimeEnvelope env = long_time_envelope(model);
  ojson doc;
  doc["eigenvalues"] = vector_json(eigs);
  doc["ellipticity"] = to_string(ell.kind);
  doc["min_hermitian_eigenvalue"] = ell.min_hermitian_eig;
  doc["envelope"] = {{"alpha", env.alpha},
                     {"r", env.r},
                     {"degenerate_clustering", env.degenerate_clustering}};
  emit(out, doc, format);
  return 0;
}

int cmd_sv(const QuadraticModel& model, Complex t, std::int64_t count,
           std::int64_t max_degree, const std::string& format,
           std::ostream& out) {
  const SingularSpectrum spec = singular_spectrum(model, t);
  const std::vector<double> values =
      max_degree >= 0 ? semigroup_singular_values_capped(spec, count, max_degree)
                      : semigroup_singular_values(spec, count);
  ojson doc;
  doc["t"] = complex_json(t);
  doc["count"] = static_cast<std::int64_t>(values.size());
  if (max_degree >= 0) doc["max_degree"] = max_degree;
  doc["singular_values"] = values;
  emit(out, doc, format);
  return 0;
}

int cmd_verify(const QuadraticModel& model, Complex t, std::int64_t max_degree,
               const std::string& format, std::ostream& out) {
  if (max_degree < 0)
    throw precondition_error("verify: --max-degree must be >= 0");
  ojson degrees = ojson::array();
  double worst_svd = 0.0;
  double worst_oracle = 0.0;
  for (std::int64_t m = 0; m <= max_degree; ++m) {
    const double dev = verify_svd_theorem(model, t, m);
    const BlockOperator prop = propagator_block(model, t, m);
    const ComplexMatrix oracle = expm(p_block(model, m).matrix, -t);
    const double denom = std::max(spectral_norm(prop.matrix), 1e-300);
    const double resid = spectral_norm(prop.matrix - oracle) / denom;
    worst_svd = std::max(worst_svd, dev);
    worst_oracle = std::max(worst_oracle, resid);
    degrees.push_back(ojson{{"degree", m},
                            {"svd_deviation", dev},
                            {"oracle_residual", resid}});
  }
  const bool pass = worst_svd <= kVerifyThreshold && worst_oracle <= kVerifyThreshold;
  ojson doc;
  doc["t"] = complex_json(t);
  doc["max_degree"] = max_degree;
  doc["threshold"] = kVerifyThreshold;
  doc["degrees"] = std::move(degrees);
  doc["max_svd_deviation"] = worst_svd;
  doc["max_oracle_residual"] = worst_oracle;
  doc["pass"] = pass;
  emit(out, doc, format);
  return pass ? 0 : 1;
}

int cmd_ladder(const QuadraticModel& model, std::int64_t degree,
               const std::string& format, std::ostream& out) {
  const EigenvalueLadder ladder = eigen_ladder(model, degree);
  ojson entries = ojson::array();
  for (const auto& [alpha, lambda] : ladder.entries)
    entries.push_back(ojson{{"alpha", alpha}, {"lambda", complex_json(lambda)}});
  ojson doc;
  doc["degree"] = degree;
  doc["base_eigenvalues"] = vector_json(ladder.base);
  doc["ladder"] = std::move(entries);
  emit(out, doc, format);
  return 0;
}

int cmd_propagate(const QuadraticModel& model, Complex t,
                  const std::string& state_path, const std::string& format,
                  std::ostream& out) {
  const HermiteState state = parse_state_file(read_file(state_path));
  if (state.n != model.n)
    throw precondition_error("propagate: state dimension does not match model");
  const HermiteState evolved = propagate(model, t, state);

  ojson doc = state_json(evolved);
  ojson meta;
  meta["t"] = complex_json(t);
  meta["norm_in"] = state.norm();
  meta["norm_out"] = evolved.norm();

  // Lowest occupied degree d: the state is orthogonal to the projection onto
  // degrees <= d-1, so the contraction bound sigma_max^d applies.
  std::int64_t lowest = -1;
  for (std::int64_t m = 0; m <= state.max_degree && lowest < 0; ++m)
    if (!state.blocks[static_cast<std::size_t>(m)].isZero(0.0)) lowest = m;
  if (lowest >= 1) {
    const SingularSpectrum spec = singular_spectrum(model, t);
    if (spec.sigma_max() <= 1.0 + 1e-10) {
      const double factor = equilibrium_norm(spec, lowest - 1);
      meta["equilibrium_bound"] = ojson{{"N", lowest - 1},
                                        {"factor", factor},
                                        {"value", factor * state.norm()}};
    }
  }
  ojson full;
  full["n"] = doc["n"];
  for (auto& [key, value] : meta.items()) full[key] = value;
  full["coefficients"] = std::move(doc["coefficients"]);
  emit(out, full, format);
  return 0;
}

int cmd_scan(const QuadraticModel& model, const GridAxis& re_axis,
             const GridAxis& im_axis, double tol, const std::string& out_path,
             const std::string& heatmap_path, double floor,
             const std::string& format, std::ostream& out) {
  const unsigned threads = env_thread_cap();
  const RegionScan scan = scan_grid(model, re_axis, im_axis, tol, threads);

  std::ofstream csv(out_path, std::ios::binary);
  if (!csv) throw precondition_error("scan: cannot open output file '" + out_path + "'");
  write_scan_csv(scan, csv);
  csv.close();

  ojson doc;
  doc["out"] = out_path;
  doc["re_points"] = scan.re_axis.count;
  doc["im_points"] = scan.im_axis.count;
  doc["cells"] = static_cast<std::int64_t>(scan.cells.size());
  if (!heatmap_path.empty()) {
    const std::vector<std::uint8_t> bytes = render_heatmap(scan, floor);
    std::ofstream pgm(heatmap_path, std::ios::binary);
    if (!pgm)
      throw precondition_error("scan: cannot open heatmap file '" + heatmap_path + "'");
    pgm.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    pgm.close();
    doc["heatmap"] = heatmap_path;
    doc["floor"] = floor;
  }
  emit(out, doc, format);
  return 0;
}

int cmd_asymptotics(const QuadraticModel& model, Complex t, std::int64_t count,
                    const std::string& format, std::ostream& out) {
  if (count < 1) throw precondition_error("asymptotics: --count must be >= 1");
  const SingularSpectrum spec = singular_spectrum(model, t);
  const double constant = weyl_constant(spec);
  const std::vector<double> logs = semigroup_singular_logs(spec, count);
  const double inv_n = 1.0 / static_cast<double>(spec.n());
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const double j = static_cast<double>(i + 1);
    rows.push_back(ojson{{"j", static_cast<std::int64_t>(i + 1)},
                         {"neg_log_sj", logs[i]},
                         {"weyl_prediction", constant * std::pow(j, inv_n)}});
  }
  ojson doc;
  doc["t"] = complex_json(t);
  doc["weyl_constant"] = constant;
  doc["rows"] = std::move(rows);
  emit(out, doc, format);
  return 0;
}

int cmd_probe(const QuadraticModel& model, const std::string& z_text,
              const std::string& format, std::ostream& out) {
  std::optional<ComplexVector> direction;
  if (!z_text.empty()) direction = parse_complex_list(z_text, "probe: --z");
  const ProbeResult result =
      norm_derivative_probe(model, direction, default_probe_samples());
  ojson doc;
  doc["order"] = result.order;
  doc["coefficient"] = result.coefficient;
  emit(out, doc, format);
  return 0;
}

int cmd_sector(const QuadraticModel& model, const std::string& format,
               std::ostream& out) {
  const NormalSector sector = normal_sector(model);
  ojson radians = ojson::array();
  ojson degrees = ojson::array();
  for (const auto& [lo, hi] : sector.intervals) {
    radians.push_back(ojson::array({lo, hi}));
    degrees.push_back(ojson::array({lo * 180.0 / 3.141592653589793238462643,
                                    hi * 180.0 / 3.141592653589793238462643}));
  }
  ojson doc;
  doc["full_circle"] = sector.full_circle;
  doc["intervals_radians"] = std::move(radians);
  doc["intervals_degrees"] = std::move(degrees);
  emit(out, doc, format);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Exact spectral analysis of quadratic semigroups exp(-tP) "
               "through the n x n matrix M"};
  app.require_subcommand(1);
  std::string format = "json";

  ModelOption model_opt;
  std::string t_text = "0";
  std::int64_t count = 10;
  std::int64_t max_degree = -1;
  std::int64_t degree = 0;
  std::string state_path;
  std::string re_text, im_text;
  std::string out_path, heatmap_path;
  double floor = -1.0;
  double tol = 1e-10;
  std::string z_text;

  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_opt.path, "Model JSON file")->required();
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "compact"}));
  };

  CLI::App* classify_cmd = app.add_subcommand(
      "classify", "Singular values of e^{-tM}, boundedness class, smoothing exponent");
  add_model(classify_cmd);
  classify_cmd->add_option("--t", t_text, "Complex time RE or RE,IM")->required();

  CLI::App* spectrum_cmd = app.add_subcommand(
      "spectrum", "Eigenvalues, ellipticity and the long-time envelope");
  add_model(spectrum_cmd);

  CLI::App* sv_cmd = app.add_subcommand(
      "sv", "Largest singular values of the solution operator exp(-tP)");
  add_model(sv_cmd);
  sv_cmd->add_option("--t", t_text, "Complex time RE or RE,IM")->required();
  sv_cmd->add_option("--count", count, "How many values")->required();
  sv_cmd->add_option("--max-degree", max_degree,
                     "Cap the energy degree (needed when ||e^{-tM}|| >= 1)");

  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "Cross-check the blockwise SVD identity and the dual block construction");
  add_model(verify_cmd);
  verify_cmd->add_option("--t", t_text, "Complex time RE or RE,IM")->required();
  verify_cmd->add_option("--max-degree", max_degree, "Highest energy degree")
      ->required();

  CLI::App* ladder_cmd = app.add_subcommand(
      "ladder", "Eigenvalues sum_j lambda_j alpha_j on one energy level");
  add_model(ladder_cmd);
  ladder_cmd->add_option("--degree", degree, "Energy degree")->required();

  CLI::App* propagate_cmd =
      app.add_subcommand("propagate", "Evolve a Hermite state by exp(-tP)");
  add_model(propagate_cmd);
  propagate_cmd->add_option("--t", t_text, "Complex time RE or RE,IM")->required();
  propagate_cmd->add_option("--state", state_path, "State JSON file")->required();

  CLI::App* scan_cmd = app.add_subcommand(
      "scan", "Grid of log||e^{-tM}|| and boundedness classes over complex t");
  add_model(scan_cmd);
  scan_cmd->add_option("--re", re_text, "Real axis START:STOP:STEP")->required();
  scan_cmd->add_option("--im", im_text, "Imaginary axis START:STOP:STEP")->required();
  scan_cmd->add_option("--out", out_path, "CSV output path")->required();
  scan_cmd->add_option("--heatmap", heatmap_path, "Optional PGM output path");
  scan_cmd->add_option("--floor", floor, "log-norm mapped to black (negative)");
  scan_cmd->add_option("--tol", tol, "Classification tolerance at sigma = 1");

  CLI::App* asym_cmd = app.add_subcommand(
      "asymptotics", "Weyl constant and -log s_j against C j^{1/n}");
  add_model(asym_cmd);
  asym_cmd->add_option("--t", t_text, "Complex time RE or RE,IM")->required();
  asym_cmd->add_option("--count", count, "Table length")->required();

  CLI::App* probe_cmd = app.add_subcommand(
      "probe", "Small-time power law of ||e^{-tM}|| or |e^{-tM} z|");
  add_model(probe_cmd);
  probe_cmd->add_option("--z", z_text, "Direction RE,IM,RE,IM,...");

  CLI::App* sector_cmd = app.add_subcommand(
      "sector", "arg t sector where a normal operator with the same eigenvalues stays bounded");
  add_model(sector_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    const QuadraticModel model = model_opt.load();
    if (classify_cmd->parsed())
      return cmd_classify(model, parse_complex_scalar(t_text, "--t"), format, out);
    if (spectrum_cmd->parsed()) return cmd_spectrum(model, format, out);
    if (sv_cmd->parsed())
      return cmd_sv(model, parse_complex_scalar(t_text, "--t"), count, max_degree,
                    format, out);
    if (verify_cmd->parsed())
      return cmd_verify(model, parse_complex_scalar(t_text, "--t"), max_degree,
                        format, out);
    if (ladder_cmd->parsed()) return cmd_ladder(model, degree, format, out);
    if (propagate_cmd->parsed())
      return cmd_propagate(model, parse_complex_scalar(t_text, "--t"), state_path,
                           format, out);
    if (scan_cmd->parsed()) {
      if (!heatmap_path.empty() && !(floor < 0.0))
        throw precondition_error("scan: --heatmap requires a negative --floor");
      return cmd_scan(model, parse_axis(re_text, "--re"), parse_axis(im_text, "--im"),
                      tol, out_path, heatmap_path, floor, format, out);
    }
    if (asym_cmd->parsed())
      return cmd_asymptotics(model, parse_complex_scalar(t_text, "--t"), count,
                             format, out);
    if (probe_cmd->parsed()) return cmd_probe(model, z_text, format, out);
    if (sector_cmd->parsed()) return cmd_sector(model, format, out);
    err << "no subcommand selected\n";
    return 2;
  } catch (const inconclusive_fit& e) {
    ojson doc;
    doc["error"] = e.what();
    ojson samples = ojson::array();
    for (const auto& [t, f] : e.samples) samples.push_back(ojson::array({t, f}));
    doc["samples"] = std::move(samples);
    emit(out, doc, format);
    return 3;
  } catch (const error& e) {
    ojson doc;
    doc["error"] = e.what();
    emit(out, doc, format);
    return 3;
  }
}

}  // namespace qsemi::cli
