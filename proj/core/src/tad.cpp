#include "exitlab/tad.hpp"

#include "exitlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace exitlab {

void TadConfig::validate() const {
    if (!(h_low > 0.0 && h_low <= h_high)) throw Error(ErrorCode::InvalidArgument, "need 0 < h_low <= h_high");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
    if (!(nu_min > 0.0)) throw Error(ErrorCode::InvalidArgument, "nu_min must be positive");
    if (!(sim.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
}

double extrapolate_time(double tau_high, double delta_f, double h_low, double h_high) {
    if (delta_f < 0.0) throw Error(ErrorCode::InvalidArgument, "delta_f must be non-negative");
    return tau_high * std::exp(2.0 * (1.0 / h_low - 1.0 / h_high) * delta_f);
}

double stop_time(double tau_min_low, const TadConfig& cfg) {
    if (!(tau_min_low > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau_min_low must be positive");
    const double l = std::log(1.0 / cfg.alpha);
    return l / cfg.nu_min * std::pow(cfg.nu_min * tau_min_low / l, cfg.h_low / cfg.h_high);
}

Equilibrator::Equilibrator(const Landscape& l, const TadConfig& cfg)
    : p_(l.potential), domain_(l.grid.domain()), cfg_(cfg), start_(Vec::Zero()) {
    cfg_.validate();
    // reflected runs start at the deepest minimum, or the centre when there is none
    const bool has_min = std::any_of(l.critical_points.begin(), l.critical_points.end(),
                                     [](const CriticalPoint& c) { return c.is_minimum(); });
    if (has_min) {
        start_ = l.x0().location;
    } else {
        for (int k = 0; k < domain_.dim; ++k) start_(k) = 0.5 * (domain_.lo[k] + domain_.hi[k]);
    }
    if (cfg_.restart == RestartMode::SpectralQsd) {
        const GeneratorMatrix a = assemble_generator(l.potential, l.grid, cfg_.h_high);
        sol_ = std::make_shared<const SpectralSolution>(principal_eigenpair(a));
    }
}

Vec Equilibrator::draw(Rng& rng, const std::optional<Vec>& previous) const {
    if (sol_) return sample_qsd(*sol_, rng);
    SimConfig sim = cfg_.sim;
    sim.h = cfg_.h_high;
    Vec x = previous ? reflect_into(*previous, domain_) : start_;
    const auto steps = static_cast<std::uint64_t>(std::ceil(cfg_.burn_in / sim.dt));
    for (std::uint64_t i = 0; i < steps; ++i) x = reflected_step(x, p_, domain_, sim, rng);
    if (!domain_.contains(x)) x = reflect_into(x + 1e-12 * (start_ - x), domain_);
    return x;
}

Vec equilibrate(const Landscape& l, const TadConfig& cfg, Rng& rng) {
    return Equilibrator(l, cfg).draw(rng, std::nullopt);
}

TadResult tad_run(const Landscape& l, const TadConfig& cfg, const Equilibrator& eq, Rng& rng) {
    cfg.validate();
    const double f0 = l.x0().f_value;
    const Domain& domain = l.grid.domain();
    const ChannelMap channels = landscape_channels(l);
    SimConfig sim = cfg.sim;
    sim.h = cfg.h_high;

    TadResult r;
    r.T_stop = std::numeric_limits<double>::infinity();
    std::vector<char> seen(l.zs.size(), 0);
    double tau_min = std::numeric_limits<double>::infinity();
    int arg = -1;
    std::optional<Vec> last;
    for (;;) {
        if (r.n_high_exits >= cfg.max_high_exits)
            throw Error(ErrorCode::BudgetExceeded, "too many high-temperature exits");
        const Vec x = eq.draw(rng, last);
        const ExitEvent ev = sample_exit(x, l.potential, domain, channels, sim, rng);
        if (r.T_sim + ev.tau > r.T_stop) {
            // the clock stops at T_stop; this event is never observed
            r.T_sim = r.T_stop;
            break;
        }
        r.T_sim += ev.tau;
        ++r.n_high_exits;
        last = ev.exit_point;
        if (!ev.channel) throw Error(ErrorCode::ChannelUnresolved, "exit point outside every basin");
        const int j = *ev.channel;
        if (seen[static_cast<std::size_t>(j)]) continue;
        seen[static_cast<std::size_t>(j)] = 1;
        const double df = std::max(0.0, l.zs[static_cast<std::size_t>(j)].f_value - f0);
        const double tl = extrapolate_time(r.T_sim, df, cfg.h_low, cfg.h_high);
        r.tau_table.push_back({j, r.T_sim, tl});
        if (tl < tau_min) {
            tau_min = tl;
            arg = j;
            r.T_stop = stop_time(tau_min, cfg);
        }
    }
    r.T = tau_min;
    r.Y = arg;
    r.speedup = r.T_sim > 0 ? r.T / r.T_sim : 0.0;
    const double df1 = std::max(0.0, l.zs.front().f_value - f0);
    r.speedup_reference = std::exp(2.0 * df1 * (1.0 / cfg.h_low - 1.0 / cfg.h_high));
    return r;
}

SyntheticTadOutcome synthetic_tad_trial(std::span<const SyntheticChannel> channels, const TadConfig& cfg,
                                        Rng& rng) {
    cfg.validate();
    const std::size_t n = channels.size();
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "no channels");
    // first arrival of each channel's high-temperature Poisson clock
    std::vector<double> t_high(n);
    std::vector<double> t_low(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double k = channels[j].nu * std::exp(-2.0 * channels[j].delta / cfg.h_high);
        t_high[j] = -std::log(rng.uniform_open0()) / k;
        t_low[j] = extrapolate_time(t_high[j], channels[j].delta, cfg.h_low, cfg.h_high);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t_high[a] < t_high[b]; });

    SyntheticTadOutcome o;
    double tau_min = std::numeric_limits<double>::infinity();
    double t_stop = std::numeric_limits<double>::infinity();
    for (std::size_t j : order) {
        if (t_high[j] > t_stop) break;
        if (t_low[j] < tau_min) {
            tau_min = t_low[j];
            o.Y = static_cast<int>(j);
            t_stop = stop_time(tau_min, cfg);
        }
    }
    o.T = tau_min;
    const auto best = std::min_element(t_low.begin(), t_low.end());
    o.true_T = *best;
    o.true_Y = static_cast<int>(best - t_low.begin());
    o.miss = o.true_Y != o.Y;
    return o;
}

}  // namespace exitlab
