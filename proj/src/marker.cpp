#include "triroc/marker.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace triroc {

namespace {

using njson = nlohmann::ordered_json;

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

// RFC-4180-style records: quoted fields may contain commas, doubled quotes
// and newlines; accepts \n and \r\n endings; blank lines are skipped.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      field.clear();
      record.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (in_quotes) throw DataError("CSV: unterminated quoted field");
  if (!field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

double class_mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::string estimate_label(Measure measure, Method method) {
  std::string label = to_string(measure);
  switch (method) {
    case Method::kNormal:
      return label + "_N";
    case Method::kBoxCoxNormal:
      return label + "_N^BC";
    case Method::kKernel:
      return label + "_K";
    case Method::kEmpirical:
      return label + "_E";
  }
  return label;
}

Method method_from_string(const std::string& s) {
  if (s == "normal") return Method::kNormal;
  if (s == "boxcox-normal") return Method::kBoxCoxNormal;
  if (s == "kernel") return Method::kKernel;
  if (s == "empirical") return Method::kEmpirical;
  throw DataError("report: unknown method '" + s + "'");
}

Measure measure_from_string(const std::string& s) {
  if (s == "OVL") return Measure::kOvl;
  if (s == "VUS") return Measure::kVus;
  throw DataError("report: unknown measure '" + s + "'");
}

std::string fixed4(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string sig8(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

}  // namespace

MarkerDataset load_csv(const std::string& path, const std::string& value_column,
                       const std::string& class_column,
                       const std::array<std::string, 3>& class_order) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::vector<std::vector<std::string>> records = parse_csv(buf.str());
  if (records.empty()) throw DataError("'" + path + "' is empty");

  // Header row; tolerate a UTF-8 byte-order mark on the first cell.
  std::vector<std::string>& header = records[0];
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  auto column = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (trim(header[c]) == name) return c;
    std::string msg = "column '" + name + "' not found; file has:";
    for (const auto& h : header) msg += " '" + trim(h) + "'";
    throw DataError(msg);
  };
  const std::size_t value_idx = column(value_column);
  const std::size_t class_idx = column(class_column);

  MarkerDataset ds;
  ds.marker_name = value_column;
  ds.class_labels = class_order;

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string value_cell = value_idx < rec.size() ? trim(rec[value_idx]) : "";
    const std::string class_cell = class_idx < rec.size() ? trim(rec[class_idx]) : "";
    if (value_cell.empty() || class_cell.empty()) {
      ++ds.rows_dropped;
      continue;
    }
    int k = -1;
    for (int i = 0; i < 3; ++i)
      if (class_cell == class_order[static_cast<std::size_t>(i)]) k = i;
    if (k < 0)
      throw DataError("row " + std::to_string(r + 1) + ": unknown class label '" + class_cell +
                      "'");
    char* end = nullptr;
    const double value = std::strtod(value_cell.c_str(), &end);
    if (end != value_cell.c_str() + value_cell.size() || !std::isfinite(value))
      throw DataError("row " + std::to_string(r + 1) + ": cannot parse value '" + value_cell +
                      "'");
    (k == 0 ? ds.sample.class1 : k == 1 ? ds.sample.class2 : ds.sample.class3).push_back(value);
  }

  for (int k = 1; k <= 3; ++k)
    if (ds.sample.cls(k).size() < 2)
      throw DataError("class '" + class_order[static_cast<std::size_t>(k - 1)] +
                      "' has fewer than 2 usable rows");
  if (ds.rows_dropped > 0)
    ds.warnings.push_back(std::to_string(ds.rows_dropped) +
                          " row(s) dropped (missing value or class)");
  return ds;
}

MarkerDataset orient(MarkerDataset dataset) {
  if (dataset.oriented) return dataset;
  const double m1 = class_mean(dataset.sample.class1);
  const double m2 = class_mean(dataset.sample.class2);
  const double m3 = class_mean(dataset.sample.class3);
  if (m1 > m2 && m2 > m3) {
    for (auto cls : {&dataset.sample.class1, &dataset.sample.class2, &dataset.sample.class3})
      for (double& x : *cls) x = -x;
    dataset.orientation_sign = -1;
  } else if (!(m1 < m2 && m2 < m3)) {
    dataset.warnings.push_back("class means are not monotone in severity; marker not re-signed");
  }
  dataset.oriented = true;
  return dataset;
}

NormalityCheck check_normality(const ThreeClassSample& sample, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("check_normality: threshold must be in (0,1)");
  NormalityCheck check;
  check.threshold = threshold;
  check.all_normal = true;
  for (int k = 1; k <= 3; ++k) {
    check.per_class[static_cast<std::size_t>(k - 1)] = shapiro_wilk(sample.cls(k));
    if (check.per_class[static_cast<std::size_t>(k - 1)].p_value < threshold)
      check.all_normal = false;
  }
  return check;
}

MarkerReport analyze_marker(const MarkerDataset& dataset, const AnalyzeOptions& options) {
  if (!dataset.oriented)
    throw std::invalid_argument("analyze_marker: dataset must be oriented first");

  MarkerReport report;
  report.marker_name = dataset.marker_name;
  report.class_labels = dataset.class_labels;
  report.class_sizes = {dataset.sample.class1.size(), dataset.sample.class2.size(),
                        dataset.sample.class3.size()};
  report.orientation_sign = dataset.orientation_sign;
  report.rows_dropped = dataset.rows_dropped;
  report.warnings = dataset.warnings;
  report.seed = options.boot.seed;

  report.normality = check_normality(dataset.sample, options.normality_threshold);
  report.parametric =
      report.normality.all_normal ? Method::kNormal : Method::kBoxCoxNormal;

  std::vector<Method> methods;
  for (MethodChoice choice : options.methods) {
    Method m = Method::kNormal;
    switch (choice) {
      case MethodChoice::kAuto:
        m = report.parametric;
        break;
      case MethodChoice::kNormal:
        m = Method::kNormal;
        break;
      case MethodChoice::kBoxCox:
        m = Method::kBoxCoxNormal;
        break;
      case MethodChoice::kKernel:
        m = Method::kKernel;
        break;
      case MethodChoice::kEmpirical:
        m = Method::kEmpirical;
        break;
    }
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
  }

  if (std::find(methods.begin(), methods.end(), Method::kBoxCoxNormal) != methods.end()) {
    const BoxCoxFit bc = fit_box_cox(dataset.sample);
    report.box_cox_lambda = bc.lambda;
    report.box_cox_shift = bc.shift;
    if (bc.shift > 0.0)
      report.warnings.push_back("power transform: values shifted by " + sig8(bc.shift) +
                                " to make them positive");
    if (bc.at_boundary)
      report.warnings.push_back("power transform: lambda estimate pinned at the search boundary");
  }

  for (Method m : methods) {
    if (m != Method::kEmpirical) {
      EstimateResult ovl = bootstrap_ci(dataset.sample, Measure::kOvl, m, options.boot);
      report.ovl_bands.push_back(interpret_ovl(ovl.value));
      report.estimates.push_back(std::move(ovl));
    }
    report.estimates.push_back(bootstrap_ci(dataset.sample, Measure::kVus, m, options.boot));
  }
  return report;
}

bool MarkerReport::operator==(const MarkerReport& o) const {
  auto sw_eq = [](const ShapiroResult& a, const ShapiroResult& b) {
    return a.W == b.W && a.p_value == b.p_value;
  };
  auto ci_eq = [](const std::optional<ConfidenceInterval>& a,
                  const std::optional<ConfidenceInterval>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    return a->lo == b->lo && a->hi == b->hi && a->level == b->level && a->B == b->B;
  };
  auto est_eq = [&](const EstimateResult& a, const EstimateResult& b) {
    return a.measure == b.measure && a.method == b.method && a.value == b.value &&
           ci_eq(a.ci, b.ci) && a.redraws == b.redraws;
  };
  if (!(marker_name == o.marker_name && class_labels == o.class_labels &&
        class_sizes == o.class_sizes && orientation_sign == o.orientation_sign &&
        rows_dropped == o.rows_dropped && normality.threshold == o.normality.threshold &&
        normality.all_normal == o.normality.all_normal && parametric == o.parametric &&
        box_cox_lambda == o.box_cox_lambda && box_cox_shift == o.box_cox_shift &&
        ovl_bands == o.ovl_bands && warnings == o.warnings && seed == o.seed))
    return false;
  for (int k = 0; k < 3; ++k)
    if (!sw_eq(normality.per_class[static_cast<std::size_t>(k)],
               o.normality.per_class[static_cast<std::size_t>(k)]))
      return false;
  if (estimates.size() != o.estimates.size()) return false;
  for (std::size_t i = 0; i < estimates.size(); ++i)
    if (!est_eq(estimates[i], o.estimates[i])) return false;
  return true;
}

std::string report_to_json(const MarkerReport& report) {
  njson per_class = njson::array();
  for (const auto& sw : report.normality.per_class)
    per_class.push_back(njson{{"W", sw.W}, {"p_value", sw.p_value}});

  njson estimates = njson::array();
  std::size_t band = 0;
  for (const auto& est : report.estimates) {
    njson je{{"measure", to_string(est.measure)},
             {"method", to_string(est.method)},
             {"value", est.value}};
    if (est.ci) {
      je["ci"] = njson{
          {"lo", est.ci->lo}, {"hi", est.ci->hi}, {"level", est.ci->level}, {"B", est.ci->B}};
    } else {
      je["ci"] = nullptr;
    }
    je["redraws"] = est.redraws;
    if (est.measure == Measure::kOvl) je["band"] = report.ovl_bands.at(band++);
    estimates.push_back(std::move(je));
  }

  njson j{{"marker", report.marker_name},
          {"class_labels", report.class_labels},
          {"class_sizes", report.class_sizes},
          {"orientation_sign", report.orientation_sign},
          {"rows_dropped", report.rows_dropped},
          {"seed", report.seed},
          {"normality",
           njson{{"threshold", report.normality.threshold},
                 {"all_normal", report.normality.all_normal},
                 {"per_class", std::move(per_class)}}},
          {"parametric", to_string(report.parametric)},
          {"box_cox", report.box_cox_lambda
                          ? njson{{"lambda", *report.box_cox_lambda},
                                  {"shift", report.box_cox_shift.value_or(0.0)}}
                          : njson(nullptr)},
          {"estimates", std::move(estimates)},
          {"warnings", report.warnings}};
  return j.dump(2);
}

MarkerReport report_from_json(const std::string& json_text) {
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: invalid JSON: ") + e.what());
  }
  try {
    MarkerReport r;
    r.marker_name = j.at("marker").get<std::string>();
    r.class_labels = j.at("class_labels").get<std::array<std::string, 3>>();
    r.class_sizes = j.at("class_sizes").get<std::array<std::size_t, 3>>();
    r.orientation_sign = j.at("orientation_sign").get<int>();
    r.rows_dropped = j.at("rows_dropped").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();

    const njson& jn = j.at("normality");
    r.normality.threshold = jn.at("threshold").get<double>();
    r.normality.all_normal = jn.at("all_normal").get<bool>();
    const njson& per_class = jn.at("per_class");
    if (per_class.size() != 3) throw DataError("report: normality needs 3 classes");
    for (int k = 0; k < 3; ++k) {
      r.normality.per_class[static_cast<std::size_t>(k)].W =
          per_class.at(static_cast<std::size_t>(k)).at("W").get<double>();
      r.normality.per_class[static_cast<std::size_t>(k)].p_value =
          per_class.at(static_cast<std::size_t>(k)).at("p_value").get<double>();
    }

    r.parametric = method_from_string(j.at("parametric").get<std::string>());
    if (!j.at("box_cox").is_null()) {
      r.box_cox_lambda = j.at("box_cox").at("lambda").get<double>();
      r.box_cox_shift = j.at("box_cox").at("shift").get<double>();
    }

    for (const njson& je : j.at("estimates")) {
      EstimateResult est;
      est.measure = measure_from_string(je.at("measure").get<std::string>());
      est.method = method_from_string(je.at("method").get<std::string>());
      est.value = je.at("value").get<double>();
      if (!je.at("ci").is_null()) {
        ConfidenceInterval ci;
        ci.lo = je.at("ci").at("lo").get<double>();
        ci.hi = je.at("ci").at("hi").get<double>();
        ci.level = je.at("ci").at("level").get<double>();
        ci.B = je.at("ci").at("B").get<int>();
        est.ci = ci;
      }
      est.redraws = je.at("redraws").get<int>();
      if (est.measure == Measure::kOvl)
        r.ovl_bands.push_back(je.at("band").get<std::string>());
      r.estimates.push_back(std::move(est));
    }

    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: missing or mistyped field: ") + e.what());
  }
}

std::string report_to_text(const MarkerReport& report) {
  std::ostringstream out;
  out << "marker: " << report.marker_name;
  if (report.orientation_sign < 0) out << "  (sign flipped so values rise with severity)";
  out << "\nclasses:";
  for (int k = 0; k < 3; ++k)
    out << (k ? ", " : " ") << report.class_labels[static_cast<std::size_t>(k)] << " (n="
        << report.class_sizes[static_cast<std::size_t>(k)] << ")";
  if (report.rows_dropped > 0) out << "\nrows dropped: " << report.rows_dropped;

  out << "\nShapiro-Wilk:";
  for (int k = 0; k < 3; ++k) {
    const auto& sw = report.normality.per_class[static_cast<std::size_t>(k)];
    out << (k ? " | " : " ") << report.class_labels[static_cast<std::size_t>(k)]
        << ": W=" << fixed4(sw.W) << ", p=" << fixed4(sw.p_value);
  }
  out << "\nparametric variant: " << to_string(report.parametric) << " (threshold "
      << report.normality.threshold << ")";
  if (report.box_cox_lambda) {
    out << "\npower transform: lambda=" << fixed4(*report.box_cox_lambda)
        << ", shift=" << sig8(report.box_cox_shift.value_or(0.0));
  }

  out << "\nestimates:\n";
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"  statistic", "estimate", "CI", "band"});
  std::size_t band = 0;
  for (const auto& est : report.estimates) {
    std::vector<std::string> row;
    row.push_back("  " + estimate_label(est.measure, est.method));
    row.push_back(fixed4(est.value));
    if (est.ci) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%d%%-CI (%.4f, %.4f) B=%d",
                    static_cast<int>(std::lround(est.ci->level * 100)), est.ci->lo, est.ci->hi,
                    est.ci->B);
      row.push_back(buf);
    } else {
      row.push_back("-");
    }
    row.push_back(est.measure == Measure::kOvl ? report.ovl_bands.at(band++) : "");
    grid.push_back(std::move(row));
  }
  std::vector<std::size_t> width;
  for (const auto& row : grid) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << "\n";
  }

  for (const auto& w : report.warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string density_grid_csv(const MarkerDataset& dataset, int points) {
  if (points < 2) throw std::invalid_argument("density_grid_csv: need at least 2 grid points");
  const ThreeClassSample& s = dataset.sample;

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k = 1; k <= 3; ++k)
    for (double x : s.cls(k)) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (!(lo < hi)) throw DataError("density_grid_csv: marker values are constant");

  std::optional<NormalTriple> normal;
  try {
    normal = fit_normal_triple(s);
  } catch (const NumericalError&) {
  } catch (const DataError&) {
  }
  std::optional<BoxCoxFit> bc;
  std::optional<NormalTriple> bc_normal;
  try {
    bc = fit_box_cox(s);
    bc_normal = fit_normal_triple(apply_box_cox(*bc, s));
  } catch (const NumericalError&) {
    bc.reset();
  } catch (const DataError&) {
    bc.reset();
  }
  std::optional<KernelEstimator> kernel;
  try {
    kernel.emplace(s);
  } catch (const NumericalError&) {
  } catch (const DataError&) {
  }

  std::string csv =
      "x,normal_1,normal_2,normal_3,boxcox_1,boxcox_2,boxcox_3,kernel_1,kernel_2,kernel_3\n";
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    csv += sig8(x);
    for (int k = 0; k < 3; ++k) {
      csv += ",";
      if (normal) {
        const double z = (x - normal->mu[static_cast<std::size_t>(k)]) /
                         normal->sigma[static_cast<std::size_t>(k)];
        csv += sig8(norm_pdf(z) / normal->sigma[static_cast<std::size_t>(k)]);
      }
    }
    for (int k = 0; k < 3; ++k) {
      csv += ",";
      // Back-transformed density: fitted normal on the transformed scale
      // times the transform's derivative (x+shift)^(lambda-1).
      if (bc && bc_normal && x + bc->shift > 0.0) {
        const double y = apply_box_cox(*bc, x);
        const double z = (y - bc_normal->mu[static_cast<std::size_t>(k)]) /
                         bc_normal->sigma[static_cast<std::size_t>(k)];
        const double jac = std::pow(x + bc->shift, bc->lambda - 1.0);
        csv += sig8(norm_pdf(z) / bc_normal->sigma[static_cast<std::size_t>(k)] * jac);
      }
    }
    for (int k = 1; k <= 3; ++k) {
      csv += ",";
      if (kernel) csv += sig8(kernel->pdf(k, x));
    }
    csv += "\n";
  }
  return csv;
}

}  // namespace triroc
