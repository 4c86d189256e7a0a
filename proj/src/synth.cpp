#include "dynamo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dynamo/error.hpp"

namespace dynamo {

SynthEventKind synth_event_kind_from_string(const std::string& s) {
    if (s == "voltage_sag") return SynthEventKind::voltage_sag;
    if (s == "current_inrush") return SynthEventKind::current_inrush;
    if (s == "capacitor_step") return SynthEventKind::capacitor_step;
    if (s == "tap_step") return SynthEventKind::tap_step;
    throw ConfigError("unknown event kind: " + s);
}

std::string to_string(SynthEventKind k) {
    switch (k) {
        case SynthEventKind::voltage_sag: return "voltage_sag";
        case SynthEventKind::current_inrush: return "current_inrush";
        case SynthEventKind::capacitor_step: return "capacitor_step";
        case SynthEventKind::tap_step: return "tap_step";
    }
    return "tap_step";
}

SynthProfiles SynthProfiles::defaults() {
    SynthProfiles p;
    p.voltage.base = 1.0;
    p.voltage.components = {{0.02, 86400.0, 0.3}, {0.008, 28800.0, 1.1}};
    p.current.base = 0.5;
    p.current.components = {{0.08, 86400.0, 2.0}, {0.03, 14400.0, 0.7}, {0.01, 3600.0, 0.2}};
    p.power_factor.base = 0.95;
    p.power_factor.components = {{0.01, 86400.0, 1.5}, {0.004, 21600.0, 2.4}};
    return p;
}

Eigen::MatrixXd lorenz(double sigma, double rho, double beta,
                       const std::array<double, 3>& x0, double dt, std::size_t n) {
    if (!(dt > 0.0) || dt > 0.05)
        throw ConfigError("lorenz step must lie in (0, 0.05]");
    if (n < 1) throw ConfigError("lorenz needs at least one state");

    auto deriv = [&](const std::array<double, 3>& s) {
        return std::array<double, 3>{sigma * (s[1] - s[0]),
                                     s[0] * (rho - s[2]) - s[1],
                                     s[0] * s[1] - beta * s[2]};
    };
    auto axpy = [](const std::array<double, 3>& s, double h,
                   const std::array<double, 3>& d) {
        return std::array<double, 3>{s[0] + h * d[0], s[1] + h * d[1], s[2] + h * d[2]};
    };

    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 3);
    std::array<double, 3> s = x0;
    out(0, 0) = s[0];
    out(0, 1) = s[1];
    out(0, 2) = s[2];
    for (std::size_t i = 1; i < n; ++i) {
        const auto k1 = deriv(s);
        const auto k2 = deriv(axpy(s, 0.5 * dt, k1));
        const auto k3 = deriv(axpy(s, 0.5 * dt, k2));
        const auto k4 = deriv(axpy(s, dt, k3));
        for (int j = 0; j < 3; ++j)
            s[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        out(static_cast<Eigen::Index>(i), 0) = s[0];
        out(static_cast<Eigen::Index>(i), 1) = s[1];
        out(static_cast<Eigen::Index>(i), 2) = s[2];
    }
    return out;
}

namespace {

double profile_value(const ChannelProfile& p, double t_s) {
    double v = p.base;
    for (const auto& c : p.components)
        v += c.amplitude * std::sin(2.0 * M_PI * t_s / c.period_s + c.phase);
    return v;
}

// Per-event effect on the three channels: rectangular level templates with
// a one-sample rise, plus a broadband disturbance over the window so the
// event is dynamically distinct from the smooth base for its whole span.
struct EventShape {
    double v_level = 0.0;   // scaled by voltage base
    double i_level = 0.0;   // scaled by current base
    double pf_level = 0.0;
    bool i_decays = false;  // inrush: exponential level decay
    double v_ring = 0.0;    // disturbance std, scaled by |magnitude| * base
    double i_ring = 0.0;
    double pf_ring = 0.0;
};

EventShape shape_of(const SynthEventSpec& ev) {
    const double m = ev.magnitude;
    const double a = std::fabs(m);
    EventShape s;
    switch (ev.kind) {
        case SynthEventKind::voltage_sag:
            s.v_level = -a;
            s.v_ring = 0.25;
            break;
        case SynthEventKind::current_inrush:
            s.i_level = a;
            s.i_decays = true;
            s.v_level = -0.3 * a;
            s.i_ring = 0.25;
            s.v_ring = 0.1;
            break;
        case SynthEventKind::capacitor_step:
            s.v_level = 0.3 * a;
            s.i_level = a;
            s.v_ring = 0.1;
            s.i_ring = 0.25;
            break;
        case SynthEventKind::tap_step:
            s.v_level = m;  // signed: taps move voltage either way
            s.v_ring = 0.25;
            break;
    }
    return s;
}

}  // namespace

SynthResult synth_pmu(const SynthProfiles& profiles, double noise_std,
                      const std::vector<SynthEventSpec>& events, std::size_t n,
                      std::uint64_t seed, double sample_interval_s, Timestamp start) {
    if (n == 0) throw ConfigError("sample count must be positive");
    if (sample_interval_s <= 0.0) throw ConfigError("sample interval must be positive");
    if (noise_std < 0.0) throw ConfigError("noise level must be non-negative");

    for (const auto& ev : events) {
        if (ev.magnitude == 0.0) throw ConfigError("event magnitude must be nonzero");
        if (ev.duration == 0) throw ConfigError("event duration must be positive");
        if (ev.onset + ev.duration > n)
            throw ConfigError("event window exceeds series length");
    }
    for (std::size_t a = 0; a < events.size(); ++a)
        for (std::size_t b = a + 1; b < events.size(); ++b) {
            const auto& x = events[a];
            const auto& y = events[b];
            if (x.onset < y.onset + y.duration && y.onset < x.onset + x.duration)
                throw OverlappingEvents("events " + std::to_string(a) + " and " +
                                        std::to_string(b) + " overlap");
        }

    std::vector<Timestamp> ts(n);
    const auto interval_ns =
        static_cast<Timestamp>(std::llround(sample_interval_s * kNanosPerSecond));
    for (std::size_t i = 0; i < n; ++i)
        ts[i] = start + static_cast<Timestamp>(i) * interval_ns;

    std::vector<double> v(n), c(n), pf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * sample_interval_s;
        v[i] = profile_value(profiles.voltage, t);
        c[i] = profile_value(profiles.current, t);
        pf[i] = profile_value(profiles.power_factor, t);
    }
    std::vector<double> v_clean = v, c_clean = c, pf_clean = pf;

    // ambient noise: one stream, channel-major
    if (noise_std > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, noise_std);
        for (auto& x : v) x += gauss(rng);
        for (auto& x : c) x += gauss(rng);
        for (auto& x : pf) x += gauss(rng);
    }

    std::vector<std::uint8_t> truth(n, 0);
    for (std::size_t e = 0; e < events.size(); ++e) {
        const auto& ev = events[e];
        const auto shape = shape_of(ev);
        const double a = std::fabs(ev.magnitude);
        std::mt19937_64 ring_rng(seed ^ (0x9e3779b97f4a7c15ULL * (e + 1)));
        std::normal_distribution<double> ring(0.0, 1.0);
        for (std::size_t k = 0; k < ev.duration; ++k) {
            const std::size_t i = ev.onset + k;
            truth[i] = 1;
            const double decay =
                shape.i_decays
                    ? std::exp(-3.0 * static_cast<double>(k) /
                               static_cast<double>(ev.duration))
                    : 1.0;
            v[i] += shape.v_level * profiles.voltage.base * decay;
            c[i] += shape.i_level * profiles.current.base * decay;
            pf[i] += shape.pf_level * decay;
            if (shape.v_ring > 0.0)
                v[i] += shape.v_ring * a * profiles.voltage.base * ring(ring_rng);
            if (shape.i_ring > 0.0)
                c[i] += shape.i_ring * a * profiles.current.base * ring(ring_rng);
            if (shape.pf_ring > 0.0) pf[i] += shape.pf_ring * a * ring(ring_rng);
        }
    }

    for (auto& x : pf) x = std::clamp(x, -1.0, 1.0);
    for (auto& x : pf_clean) x = std::clamp(x, -1.0, 1.0);

    SynthResult out{
        MeasurementFrame(ts, {"V", "I", "PF"}, {std::move(v), std::move(c), std::move(pf)}),
        std::move(truth),
        MeasurementFrame(std::move(ts), {"V", "I", "PF"},
                         {std::move(v_clean), std::move(c_clean), std::move(pf_clean)})};
    out.frame.set_sample_interval(sample_interval_s);
    out.clean.set_sample_interval(sample_interval_s);
    return out;
}

}  // namespace dynamo
