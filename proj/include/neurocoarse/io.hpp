#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "neurocoarse/coarse.hpp"
#include "neurocoarse/micro.hpp"
#include "neurocoarse/numerics.hpp"
#include "neurocoarse/rare_events.hpp"

namespace neurocoarse {

// shortest decimal that round-trips the double
std::string format_double(double v);

// columns: t, p, rho11, rho10, rho00 (rho01 equals rho10 and is omitted)
void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const CoarseObservables> trajectory);

// columns: series_id, t, p, rho10
void write_portrait_csv(const std::filesystem::path& path,
                        std::span<const PortraitSeries> series);

// columns: arc_index, epsilon, p_star, lambda, stable, residual
void write_branch_csv(const std::filesystem::path& path, const Branch& branch);

// [{"kind": ..., "epsilon": ...}]
void write_critical_points_json(const std::filesystem::path& path,
                                std::span<const CriticalPoint> points);

// {p0, epsilon, T, copies, mean_p, std_error, seed}
void write_coarse_step_json(const std::filesystem::path& path, double p0,
                            double epsilon, int horizon_T, int copies,
                            const CoarseResult& result, std::uint64_t seed);

// columns: psi, p, drift, diffusion, free_energy
void write_profile_csv(const std::filesystem::path& path,
                       const DriftDiffusionProfile& profile);

// {epsilon, tau, method, psi_stable, psi_unstable, censored}
void write_escape_json(const std::filesystem::path& path, double epsilon,
                       const EscapeEstimate& estimate);

}  // namespace neurocoarse
