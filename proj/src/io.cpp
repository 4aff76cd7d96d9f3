#include "neurocoarse/io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "neurocoarse/errors.hpp"

namespace neurocoarse {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const CoarseObservables> trajectory) {
  auto out = open_out(path);
  out << "t,p,rho11,rho10,rho00\n";
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const auto& o = trajectory[t];
    out << t << ',' << format_double(o.p) << ',' << format_double(o.rho11)
        << ',' << format_double(o.rho10) << ',' << format_double(o.rho00)
        << '\n';
  }
  finish(out, path);
}

void write_portrait_csv(const std::filesystem::path& path,
                        std::span<const PortraitSeries> series) {
  auto out = open_out(path);
  out << "series_id,t,p,rho10\n";
  for (const auto& s : series)
    for (const auto& pt : s.points)
      out << s.series_id << ',' << pt.t << ',' << format_double(pt.p) << ','
          << format_double(pt.rho10) << '\n';
  finish(out, path);
}

void write_branch_csv(const std::filesystem::path& path, const Branch& branch) {
  auto out = open_out(path);
  out << "arc_index,epsilon,p_star,lambda,stable,residual\n";
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const auto& bp = branch.points[i];
    out << i << ',' << format_double(bp.epsilon) << ','
        << format_double(bp.p_star) << ',' << format_double(bp.lambda) << ','
        << (bp.stable ? 1 : 0) << ',' << format_double(bp.residual) << '\n';
  }
  finish(out, path);
}

void write_critical_points_json(const std::filesystem::path& path,
                                std::span<const CriticalPoint> points) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& cp : points) {
    nlohmann::ordered_json item;
    item["kind"] =
        cp.kind == CriticalPoint::Kind::fold ? "fold" : "transcritical";
    item["epsilon"] = cp.epsilon;
    arr.push_back(item);
  }
  auto out = open_out(path);
  out << arr.dump(2) << '\n';
  finish(out, path);
}

void write_coarse_step_json(const std::filesystem::path& path, double p0,
                            double epsilon, int horizon_T, int copies,
                            const CoarseResult& result, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["p0"] = p0;
  j["epsilon"] = epsilon;
  j["T"] = horizon_T;
  j["copies"] = copies;
  j["mean_p"] = result.mean_p;
  j["std_error"] = result.std_error;
  j["seed"] = seed;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

void write_profile_csv(const std::filesystem::path& path,
                       const DriftDiffusionProfile& profile) {
  auto out = open_out(path);
  out << "psi,p,drift,diffusion,free_energy\n";
  for (std::size_t j = 0; j < profile.psi.size(); ++j) {
    out << format_double(profile.psi[j]) << ','
        << format_double(profile.p_node + profile.psi[j]) << ','
        << format_double(profile.drift[j]) << ','
        << format_double(profile.diffusion[j]) << ','
        << (j < profile.free_energy.size()
                ? format_double(profile.free_energy[j])
                : std::string("nan"))
        << '\n';
  }
  finish(out, path);
}

void write_escape_json(const std::filesystem::path& path, double epsilon,
                       const EscapeEstimate& estimate) {
  nlohmann::ordered_json j;
  j["epsilon"] = epsilon;
  j["tau"] = estimate.tau;
  j["method"] =
      estimate.method == EscapeEstimate::Method::kramers ? "kramers" : "direct";
  j["psi_stable"] = estimate.psi_stable;
  j["psi_unstable"] = estimate.psi_unstable;
  j["censored"] = estimate.censored;
  if (estimate.barrier_warning) j["barrier_warning"] = true;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace neurocoarse
