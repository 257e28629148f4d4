#include "mcal/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace mcal {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open output file " + path);
  return os;
}

std::string kernel_name(const KernelSpec& k) {
  switch (k.type) {
    case KernelSpec::Type::Softcore:
      return "softcore";
    case KernelSpec::Type::Exact:
      return "exact";
    case KernelSpec::Type::Constant:
      return "constant";
  }
  return "unknown";
}

}  // namespace

void write_iterations_csv(const std::string& path, const RunReport& report) {
  auto os = open_out(path);
  os << "n,F_n,Ftilde_n,E_vn,K_n,sdp_gap,lower_bound\n";
  for (const auto& r : report.history) {
    os << r.n << ',' << format_double(r.dual_value) << ',' << format_double(r.primal_value) << ','
       << format_double(r.ground_defect) << ',' << r.pool_size << ',' << format_double(r.sdp_gap)
       << ',' << format_double(r.lower_bound) << '\n';
  }
}

void write_potential_csv(const std::string& path, const RunReport& report) {
  auto os = open_out(path);
  os << "x,v\n";
  const MomentFamily family(report.config.moment_count, report.config.half_width);
  for (int m = 0; m < family.count; ++m) {
    const double v = report.potential.size() == family.count ? report.potential[m] : 0.0;
    os << format_double(family.node(m)) << ',' << format_double(v) << '\n';
  }
}

void write_density_csv(const std::string& path, const RunReport& report) {
  auto os = open_out(path);
  os << "x,rho_target,rho_gamma\n";
  const int D = report.config.intervals;
  const double L = report.config.half_width;
  const double h = 2.0 * L / D;
  const bool have_final = report.rho_final.cells() > 0;
  for (int i = 0; i <= D; ++i) {
    const double x = -L + i * h;
    const double rt = report.rho_target.cells() > 0 ? report.rho_target.eval(x) : 0.0;
    const double rg = have_final ? report.rho_final.eval(x) : rt;
    os << format_double(x) << ',' << format_double(rt) << ',' << format_double(rg) << '\n';
  }
}

void write_summary_json(const std::string& path, const RunReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["status"] = to_string(report.status);
  if (!report.error.empty()) j["error"] = report.error;
  j["config"] = {
      {"L", report.config.half_width},
      {"D", report.config.intervals},
      {"M", report.config.moment_count},
      {"qvec", report.config.columns_per_iteration},
      {"kernel", kernel_name(report.config.kernel)},
      {"eps", report.config.kernel.eps},
      {"tol_sdp", report.config.tol_sdp},
      {"tol_stop", report.config.tol_stop},
      {"drop_tol", report.config.drop_tol},
      {"max_iters", report.config.max_iters},
      {"seed", report.config.seed},
      {"density_file", report.config.density_file},
  };
  j["iterations"] = static_cast<int>(report.history.empty() ? 0 : report.history.back().n);
  j["final_primal"] = report.final_primal;
  j["final_lower"] = report.final_lower;
  j["bracket_width"] = report.bracket_width;
  j["final_pool_size"] = report.final_state.size();
  j["wall_seconds"] = report.wall_seconds;
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

}  // namespace mcal
