#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/geometry/diagnostics.hpp"
#include "curvtomo/geometry/santalo.hpp"
#include "curvtomo/io/experiment.hpp"
#include "curvtomo/io/formats.hpp"
#include "curvtomo/recon/solvers.hpp"
#include "curvtomo/recon/stability.hpp"

namespace curvtomo {

/// Command-line arguments shared by all subcommands.
struct CommandOptions {
    std::string config;
    std::string out;
    std::string in;
    std::string phantom;
    std::optional<std::size_t> seed;
    std::optional<std::size_t> i, j;
};

namespace detail {

inline std::unique_ptr<Experiment> open_experiment(const CommandOptions& o) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.i) c.phantom_i = *o.i;
    if (o.j) c.phantom_j = *o.j;
    const std::filesystem::path base = o.config.empty() ? std::filesystem::path(".") : std::filesystem::path(o.config).parent_path();
    return std::make_unique<Experiment>(std::move(c), base);
}

inline void require_out(const CommandOptions& o, const char* cmd) {
    if (o.out.empty()) throw ArgumentError(std::string(cmd) + ": --out is required");
}

/// Source image from --in (a grid image on the configured grid) or from the
/// phantom catalog (--phantom, else phantom.name).
inline SourceImage source_image(const Experiment& e, const CommandOptions& o) {
    if (!o.in.empty()) {
        GridImage img = read_grid_image(o.in);
        if (!(img.grid == e.grid()))
            throw FormatError(o.in + ": image grid " + std::to_string(img.grid.nx()) + "x" + std::to_string(img.grid.ny()) +
                              " does not match the configured grid " + std::to_string(e.grid().nx()) + "x" +
                              std::to_string(e.grid().ny()));
        return SourceImage(std::move(img), e.geometry().domain);
    }
    return e.phantom(o.phantom.empty() ? e.config().phantom_name : o.phantom);
}

inline void write_image_outputs(const std::string& path, const GridImage& img) {
    write_grid_image(path, img);
    write_text(path + ".csv", grid_image_csv(img));
}

inline void write_sinogram_outputs(const std::string& path, const BoundarySinogram& s) {
    write_sinogram(path, s);
    write_text(path + ".csv", sinogram_csv(s));
}

struct CheckRow {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

inline std::string checks_csv(const std::vector<CheckRow>& rows) {
    std::string s = "check,passed,value,threshold,detail\n";
    for (const auto& r : rows)
        s += r.name + "," + (r.passed ? "1" : "0") + "," + format_double(r.value) + "," + format_double(r.threshold) + "," +
             r.detail + "\n";
    return s;
}

struct AdjointPair {
    double lhs = 0.0, rhs = 0.0, rel_err = 0.0;
};

/// <A f, g>_w against <f, A^T g> on seeded Gaussian pairs, relative to
/// max(|lhs|, ||f|| ||g||).
inline std::vector<AdjointPair> ray_adjoint_pairs(const RayOperator& R, std::size_t n, std::size_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const BoundarySinogram s = R.empty_sinogram();
    std::vector<AdjointPair> out;
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<double> f(R.grid().size()), g(R.nodes().size());
        for (double& v : f) v = gauss(rng);
        for (double& v : g) v = gauss(rng);
        AdjointPair p;
        p.lhs = s.dot(R.forward_values(f), g);
        p.rhs = R.image_dot(f, R.adjoint_values(g));
        const double scale = std::max(std::abs(p.lhs), std::sqrt(R.image_dot(f, f)) * std::sqrt(s.dot(g, g)));
        p.rel_err = scale > 0.0 ? std::abs(p.lhs - p.rhs) / scale : 0.0;
        out.push_back(p);
    }
    return out;
}

struct NamedIntegrand {
    std::string name;
    PhaseIntegrand f;
};

/// f = 1, a Gaussian in x, and the Gaussian times (1 + cos(arg theta) / 2).
inline std::vector<NamedIntegrand> santalo_integrands(const Domain2& d) {
    const Vec2 c = d.center() + Vec2{{0.2 * d.radius(), -0.1 * d.radius()}};
    const double w2 = 0.2 * d.radius() * d.radius();
    auto gauss = [c, w2](const Vec2& x) { return std::exp(-dot(x - c, x - c) / w2); };
    return {{"one", [](const Vec2&, const Vec2&) { return 1.0; }},
            {"gaussian", [gauss](const Vec2& x, const Vec2&) { return gauss(x); }},
            {"gaussian-cos", [gauss](const Vec2& x, const Vec2& th) {
                 return gauss(x) * (1.0 + 0.5 * std::cos(std::atan2(th[1], th[0])));
             }}};
}

inline SantaloOptions santalo_options(const Experiment& e) {
    SantaloOptions so;
    so.n_boundary = e.config().verify_santalo_boundary;
    so.n_angle = e.config().verify_santalo_angles;
    so.n_ray = e.config().verify_santalo_ray;
    so.integrator = e.geometry().integrator;
    return so;
}

inline double integrator_step(const Experiment& e) {
    return e.config().integrator_step > 0.0 ? e.config().integrator_step : 1e-3 * e.geometry().outer().diameter();
}

}  // namespace detail

/// Geometry checks (convexity of both discs, non-trapping), energy drift,
/// Santalo's formula and the transpose dot-product test. Trajectory-based
/// checks are skipped (and fail) when the geometry checks fail. Returns 0
/// iff every check passes.
inline int cmd_verify(const CommandOptions& o, std::ostream& log, std::ostream& err) {
    const auto e = detail::open_experiment(o);
    const Geometry& geo = e->geometry();
    const ExperimentConfig& c = e->config();
    std::vector<detail::CheckRow> rows;
    auto guarded = [&](const std::string& name, double threshold, auto&& body) {
        detail::CheckRow r{name, false, 0.0, threshold, ""};
        try {
            body(r);
        } catch (const std::exception& ex) {
            r.passed = false;
            r.detail = std::string("error: ") + ex.what();
        }
        std::replace(r.detail.begin(), r.detail.end(), ',', ';');
        rows.push_back(r);
        return r.passed;
    };

    bool geometry_ok = true;
    for (const auto* dom : {&geo.domain, &geo.outer()}) {
        const std::string name = dom == &geo.domain ? "convexity-domain" : "convexity-outer";
        const Domain2 bare = Domain2::ball(dom->center(), dom->radius());
        geometry_ok &= guarded(name, 0.0, [&](detail::CheckRow& r) {
            const auto rep = check_strict_convexity(bare, geo.shell, c.verify_convexity_boundary, 16, geo.integrator);
            r.value = static_cast<double>(rep.violations.size());
            r.passed = rep.passed();
            if (!rep.passed()) {
                const auto& v = rep.violations.front();
                r.detail = std::to_string(rep.violations.size()) + " violations; first at boundary sample " +
                           std::to_string(v.boundary_index) + " (polar angle " + format_double(v.polar_angle) + ")";
            }
        });
    }
    geometry_ok &= guarded("nontrapping", 0.0, [&](detail::CheckRow& r) {
        const double budget = 50.0 * geo.outer().diameter() / geo.shell.min_speed();
        const auto rep = check_nontrapping(geo.outer(), geo.shell, c.verify_nontrapping_samples, budget, c.seed, geo.integrator);
        r.value = static_cast<double>(rep.trapped.size());
        r.passed = rep.passed();
        r.detail = rep.passed() ? "max travel " + format_double(rep.max_travel)
                                : std::to_string(rep.trapped.size()) + " trapped; first sample " +
                                      std::to_string(rep.trapped.front().index);
    });
    guarded("energy-drift", c.verify_drift_tol, [&](detail::CheckRow& r) {
        const auto rep = energy_drift_sweep(geo.outer(), geo.shell, c.verify_trajectories, detail::integrator_step(*e), c.seed);
        r.value = rep.max_drift;
        r.passed = rep.max_drift <= c.verify_drift_tol;
        r.detail = "half-step ratio " + format_double(rep.ratio);
    });
    if (geometry_ok) {
        guarded("santalo", c.verify_santalo_tol, [&](detail::CheckRow& r) {
            const auto fs = detail::santalo_integrands(geo.outer());
            std::vector<PhaseIntegrand> fns;
            for (const auto& f : fs) fns.push_back(f.f);
            const auto reps = santalo_check_many(fns, geo.outer(), geo.shell, detail::santalo_options(*e));
            for (const auto& rep : reps) r.value = std::max(r.value, rep.rel_err);
            r.passed = r.value <= c.verify_santalo_tol;
        });
        guarded("adjoint", c.verify_adjoint_tol, [&](detail::CheckRow& r) {
            for (const auto& p : detail::ray_adjoint_pairs(e->ray(), c.verify_adjoint_pairs, c.seed))
                r.value = std::max(r.value, p.rel_err);
            r.passed = r.value <= c.verify_adjoint_tol;
        });
    } else {
        for (const auto* name : {"santalo", "adjoint"})
            rows.push_back({name, false, 0.0, name == std::string("santalo") ? c.verify_santalo_tol : c.verify_adjoint_tol,
                            "skipped: geometry checks failed"});
    }

    bool all = true;
    for (const auto& r : rows) {
        log << (r.passed ? "PASS " : "FAIL ") << r.name << " value=" << format_double(r.value)
            << " threshold=" << format_double(r.threshold) << (r.detail.empty() ? "" : " (" + r.detail + ")") << "\n";
        if (!r.passed) {
            err << "verify: check '" << r.name << "' failed" << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
            all = false;
        }
    }
    if (!o.out.empty()) detail::write_text(o.out, detail::checks_csv(rows));
    return all ? 0 : 1;
}

inline int cmd_phantom(const CommandOptions& o, std::ostream& log) {
    detail::require_out(o, "phantom");
    const auto e = detail::open_experiment(o);
    const SourceImage f = e->phantom(o.phantom.empty() ? e->config().phantom_name : o.phantom);
    detail::write_image_outputs(o.out, f.image);
    log << "wrote " << o.out << " (" << f.grid().nx() << "x" << f.grid().ny() << ")\n";
    return 0;
}

/// Attenuated ray transform of the source (no scattering).
inline int cmd_transform(const CommandOptions& o, std::ostream& log) {
    detail::require_out(o, "transform");
    const auto e = detail::open_experiment(o);
    const SourceImage f = detail::source_image(*e, o);
    const BoundarySinogram s = e->ray().forward(f);
    detail::write_sinogram_outputs(o.out, s);
    log << "wrote " << o.out << " (" << s.size() << " nodes)\n";
    return 0;
}

/// Full measurement: ray transform plus the scattered part of the
/// transport solution.
inline int cmd_simulate(const CommandOptions& o, std::ostream& log) {
    detail::require_out(o, "simulate");
    const auto e = detail::open_experiment(o);
    const SourceImage f = detail::source_image(*e, o);
    const auto r = e->measurement().measure(f, e->transport_options());
    detail::write_sinogram_outputs(o.out, r.sinogram);
    log << "wrote " << o.out << " (" << r.sinogram.size() << " nodes, " << r.solution.iterations
        << " transport iterations)\n";
    return 0;
}

inline int cmd_reconstruct(const CommandOptions& o, std::ostream& log) {
    detail::require_out(o, "reconstruct");
    if (o.in.empty()) throw ArgumentError("reconstruct: --in sinogram is required");
    const auto e = detail::open_experiment(o);
    const BoundarySinogram data = attach_sinogram(read_sinogram_records(o.in), e->ray().empty_sinogram());
    const InverseProblemSetup s = e->setup();
    const ExperimentConfig& c = e->config();
    ReconstructionResult r;
    if (c.recon_method == "cgne") {
        CgneOptions co;
        co.max_iter = c.recon_max_iter;
        co.tol = c.recon_tol;
        r = reconstruct_cgne(s, data.values, co);
    } else {
        LandweberOptions lo;
        if (c.recon_step > 0.0) lo.step = c.recon_step;
        lo.max_iter = c.recon_max_iter;
        lo.tol = c.recon_tol;
        r = reconstruct_landweber(s, data.values, lo);
    }
    detail::write_image_outputs(o.out, r.f_hat.image);
    detail::write_text(o.out + ".residuals.csv", residual_csv(r.residual_history, r.normal_residual_history));
    log << "wrote " << o.out << " (" << c.recon_method << ", " << r.iterations << " iterations, relative data residual "
        << format_double(r.rel_data_residual) << (r.diverged ? ", diverged" : "") << ")\n";
    return r.diverged ? 1 : 0;
}

inline int cmd_adjoint_test(const CommandOptions& o, std::ostream& log, std::ostream& err) {
    const auto e = detail::open_experiment(o);
    const ExperimentConfig& c = e->config();
    const auto pairs = detail::ray_adjoint_pairs(e->ray(), c.verify_adjoint_pairs, c.seed);
    std::string csv = "pair,lhs,rhs,rel_err\n";
    double worst = 0.0;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        csv += std::to_string(t) + "," + format_double(pairs[t].lhs) + "," + format_double(pairs[t].rhs) + "," +
               format_double(pairs[t].rel_err) + "\n";
        worst = std::max(worst, pairs[t].rel_err);
    }
    if (!o.out.empty()) detail::write_text(o.out, csv);
    const bool ok = worst <= c.verify_adjoint_tol;
    log << (ok ? "PASS" : "FAIL") << " adjoint pairs=" << pairs.size() << " max_rel_err=" << format_double(worst)
        << " threshold=" << format_double(c.verify_adjoint_tol) << "\n";
    if (!ok) err << "adjoint-test: dot-product identity violated\n";
    return ok ? 0 : 1;
}

inline int cmd_santalo_check(const CommandOptions& o, std::ostream& log, std::ostream& err) {
    const auto e = detail::open_experiment(o);
    const Geometry& geo = e->geometry();
    const auto fs = detail::santalo_integrands(geo.outer());
    std::vector<PhaseIntegrand> fns;
    for (const auto& f : fs) fns.push_back(f.f);
    const auto reps = santalo_check_many(fns, geo.outer(), geo.shell, detail::santalo_options(*e));
    std::string csv = "function,lhs,rhs,rel_err,normalized_err\n";
    bool ok = true;
    for (std::size_t k = 0; k < reps.size(); ++k) {
        csv += fs[k].name + "," + format_double(reps[k].lhs) + "," + format_double(reps[k].rhs) + "," +
               format_double(reps[k].rel_err) + "," + format_double(reps[k].normalized_err) + "\n";
        const bool pass = reps[k].rel_err <= e->config().verify_santalo_tol;
        ok &= pass;
        log << (pass ? "PASS " : "FAIL ") << fs[k].name << " rel_err=" << format_double(reps[k].rel_err) << "\n";
    }
    if (!o.out.empty()) detail::write_text(o.out, csv);
    if (!ok) err << "santalo-check: relative error above " << format_double(e->config().verify_santalo_tol) << "\n";
    return ok ? 0 : 1;
}

inline int cmd_stability_probe(const CommandOptions& o, std::ostream& log) {
    const auto e = detail::open_experiment(o);
    const ExperimentConfig& c = e->config();
    std::mt19937_64 rng(c.seed);
    std::vector<SourceImage> ph;
    for (std::size_t k = 0; k < c.probe_count; ++k)
        ph.push_back(band_limited_phantom(e->grid(), e->geometry().domain, rng, static_cast<int>(c.probe_frequency)));
    const StabilityReport rep = stability_probe(e->setup(), ph);
    std::string csv = "sample,f_norm,normal_h1,ratio\n";
    for (std::size_t k = 0; k < rep.samples.size(); ++k)
        csv += std::to_string(k) + "," + format_double(rep.samples[k].f_norm) + "," + format_double(rep.samples[k].normal_h1) +
               "," + format_double(rep.samples[k].ratio) + "\n";
    if (!o.out.empty()) detail::write_text(o.out, csv);
    log << "samples=" << rep.samples.size() << " constant=" << format_double(rep.constant)
        << " min_ratio=" << format_double(rep.min_ratio) << " spread=" << format_double(rep.spread)
        << (rep.finite ? "" : " (non-finite ratio)") << "\n";
    return rep.finite ? 0 : 1;
}

}  // namespace curvtomo
