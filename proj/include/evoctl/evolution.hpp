#pragma once

#include "evoctl/linalg.hpp"

#include <functional>
#include <vector>

namespace evoctl {

struct TimeGrid {
    double t_end = 1.0;
    int n_steps = 1;
    double nu = 1.0;

    static TimeGrid make(double t_end, int n_steps, double nu);

    double tau() const { return t_end / n_steps; }
    double t(int k) const { return k * tau(); }
};

/// (∂₀M₀ + M₁ + A)x = δ⊗M₀x₀ + Jf
struct EvolutionarySystem {
    Mat M0;
    Mat M1;
    Mat A;
    Mat J;

    int dim() const { return static_cast<int>(M0.rows()); }
    void validate() const;
};

enum class Scheme { backward_euler, implicit_midpoint };

const char* scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

using Sampler = std::function<Vec(double)>;

struct Trajectory {
    TimeGrid grid;
    Scheme scheme = Scheme::backward_euler;
    std::vector<Vec> states;          // x⁰ … xⁿ at grid points
    std::vector<Vec> inputs;          // source sample used by step k → k+1
    std::vector<double> eval_times;   // time at which that sample was taken
    std::vector<Scheme> step_scheme;  // scheme actually used by each step

    int n_steps() const { return static_cast<int>(inputs.size()); }
    /// State at which step k's equation holds exactly: xᵏ⁺¹ or (xᵏ + xᵏ⁺¹)/2.
    Vec eval_state(int k) const;
};

struct WellPosednessReport {
    bool ok = false;
    double c = 0.0;
    double nu0 = 0.0;
    Vec witness;
};

/// λ_min(νM₀ + ½(M₁ + M₁ᴴ))
double coercivity(const Mat& M0, const Mat& M1, double nu);

WellPosednessReport check_wellposed(const Mat& M0, const Mat& M1, double nu_max);

/// Generic one-step integrator for E·x' + K·x = g(t).
Trajectory solve_descriptor(const Mat& E, const Mat& K, const Mat& J, const Vec& x0, const Sampler& f,
                            const TimeGrid& grid, Scheme scheme, bool singular_start);

Trajectory solve(const EvolutionarySystem& sys, const Vec& x0, const Sampler& f, const TimeGrid& grid,
                 Scheme scheme);

struct CausalityPreconditionError : std::invalid_argument {
    CausalityPreconditionError(const std::string& msg, double t) : std::invalid_argument(msg), time(t) {}
    double time;
};

double causality_defect(const EvolutionarySystem& sys, const Vec& x0, const Sampler& f1, const Sampler& f2,
                        double a, const TimeGrid& grid, Scheme scheme);

/// Trapezoid approximation of (∫ e^{−2νt}⟨x|Wx⟩ dt)^{1/2} over the grid.
double weighted_norm(const Trajectory& traj, const Mat& W);

Sampler zero_sampler(int dim);

}  // namespace evoctl
