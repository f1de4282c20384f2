#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "curvtomo/core/parallel.hpp"
#include "curvtomo/io/commands.hpp"

int main(int argc, char** argv) {
    using namespace curvtomo;
    CLI::App app{"Tomography along force-field trajectories with attenuation and scattering"};
    app.require_subcommand(1);

    CommandOptions opts;
    int threads = 0;
    std::size_t seed = 0, ci = 0, cj = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "Experiment config file (key=value)");
        sub->add_option("--out", opts.out, "Output path");
        sub->add_option("--seed", seed, "Random seed (overrides the config)");
        sub->add_option("--threads", threads, "Worker threads (default: CURVTOMO_THREADS, then OpenMP)")
            ->check(CLI::NonNegativeNumber);
    };
    auto add_source = [&](CLI::App* sub) {
        sub->add_option("--phantom", opts.phantom, "Phantom: gaussian-bump, two-discs, smooth-ring, one-hot");
        sub->add_option("--in", opts.in, "Source image file (CTG1) instead of a phantom");
        sub->add_option("--i", ci, "one-hot column index");
        sub->add_option("--j", cj, "one-hot row index");
    };

    std::map<std::string, std::function<int()>> run;
    auto sub = [&](const char* name, const char* help, std::function<int()> body) {
        CLI::App* s = app.add_subcommand(name, help);
        add_common(s);
        run[name] = std::move(body);
        return s;
    };
    sub("verify", "Run geometry, energy, Santalo and adjoint checks", [&] { return cmd_verify(opts, std::cout, std::cerr); });
    add_source(sub("simulate", "Full transport measurement of a source", [&] { return cmd_simulate(opts, std::cout); }));
    add_source(sub("transform", "Attenuated ray transform of a source", [&] { return cmd_transform(opts, std::cout); }));
    sub("adjoint-test", "Dot-product test of the transpose",
        [&] { return cmd_adjoint_test(opts, std::cout, std::cerr); });
    sub("santalo-check", "Volume against boundary integrals", [&] { return cmd_santalo_check(opts, std::cout, std::cerr); });
    sub("reconstruct", "Invert a sinogram file", [&] { return cmd_reconstruct(opts, std::cout); })
        ->add_option("--in", opts.in, "Sinogram file (CTS1)");
    add_source(sub("phantom", "Write a catalog phantom", [&] { return cmd_phantom(opts, std::cout); }));
    sub("stability-probe", "Stability ratios over band-limited phantoms",
        [&] { return cmd_stability_probe(opts, std::cout); });

    CLI11_PARSE(app, argc, argv);

    for (CLI::App* s : app.get_subcommands()) {
        if (s->count("--seed")) opts.seed = seed;
        if (s->get_option_no_throw("--i") && s->count("--i")) opts.i = ci;
        if (s->get_option_no_throw("--j") && s->count("--j")) opts.j = cj;
        if (s->count("--threads")) set_thread_count(threads);
        try {
            return run.at(s->get_name())();
        } catch (const FormatError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 3;
        } catch (const DomainError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        } catch (const ArgumentError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 4;
        }
    }
    return 1;
}
