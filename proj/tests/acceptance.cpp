// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qnd/cli.hpp"
#include "qnd/experiments.hpp"
#include "qnd/meter.hpp"

using namespace qnd;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& y) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back(i);
    }
    return out;
}

Outcome dephasing() {
    Outcome o;
    const double f = dephasing_factor(Resolution(0.5));
    o.check(std::abs(f - 0.6065) < 5e-5, "exp(-1/(8*0.25)) = " + fmt("%.6f", f));
    MeterConfig meter;
    meter.dim_m = 128;
    const Matrix rho = couple(make_coherent(3.0, 64), op_number(64), Resolution(0.5), meter).reduced_signal();
    const double amp = std::abs((rho * op_annihilate(64).matrix()).trace());
    const double err = std::abs(amp / 3.0 - f);
    o.check(err <= 1e-6, "two-mode |<a>|/alpha error " + fmt("%.2e", err));
    return o;
}

Outcome fig2() {
    Outcome o;
    const auto p = PhotonNumberQndParams::make(3.0, Resolution(0.3), OutcomeGrid(5.5, 12.5, 0.01));
    const auto curve = photon_number_curve(p, Path::closed_form);
    std::vector<double> dens, coh;
    for (const auto& s : curve) {
        dens.push_back(s.density);
        coh.push_back(std::abs(s.post_value));
    }
    const auto near = [&](const std::vector<double>& y, double target) {
        for (auto i : local_maxima(y)) {
            if (std::abs(p.grid.point(i) - target) <= 0.02) return true;
        }
        return false;
    };
    int dens_hits = 0, coh_hits = 0, coh_targets = 0;
    for (int k = 6; k <= 12; ++k) dens_hits += near(dens, k);
    for (double h = 6.5; h < 12.0; h += 1.0, ++coh_targets) coh_hits += near(coh, h);
    o.check(dens_hits == 7, "P(n_m) peaks at " + std::to_string(dens_hits) + "/7 integers");
    o.check(coh_hits == coh_targets, "|<a>_f| peaks at " + std::to_string(coh_hits) + "/" +
                                         std::to_string(coh_targets) + " half-integers");
    return o;
}

Outcome eq12() {
    Outcome o;
    double worst = 0.0;
    for (double alpha : {1.0, 3.0}) {
        for (double d : {0.1, 0.2, 0.3, 0.5, 1.0}) {
            const auto r = quantization_coherence_correlation(PhotonNumberQndParams::make(alpha, Resolution(d)));
            const double formula = -2.0 * std::exp(-2 * kPi * kPi * d * d) * std::exp(-1.0 / (8 * d * d)) * alpha;
            worst = std::max({worst, r.abs_error, std::abs(r.closed_form.real() - formula)});
        }
    }
    o.check(worst <= 1e-6, "max |numeric - closed| " + fmt("%.2e", worst));
    const auto r = quantization_coherence_correlation(PhotonNumberQndParams::make(3.0, Resolution(0.3)));
    o.check(std::abs(r.numeric.real() - (-0.25317908068)) <= 1e-5, "C(3, 0.3) = " + fmt("%.8f", r.numeric.real()));
    return o;
}

Outcome fig3() {
    Outcome o;
    const double low = std::abs(quantization_coherence_closed_form(3.0, Resolution(0.05))) / 3.0;
    const double high = std::abs(quantization_coherence_closed_form(3.0, Resolution(3.0))) / 3.0;
    o.check(low < 1e-3, "|C|/alpha(0.05) = " + fmt("%.2e", low));
    o.check(high < 1e-10, "|C|/alpha(3) = " + fmt("%.2e", high));
    std::vector<double> ds, mag;
    for (int i = 0; i <= 2950; ++i) {
        ds.push_back(0.05 + 0.001 * i);
        mag.push_back(std::abs(quantization_coherence_closed_form(3.0, Resolution(ds.back()))));
    }
    const auto peaks = local_maxima(mag);
    o.check(peaks.size() == 1, std::to_string(peaks.size()) + " interior maxima");
    std::vector<double> sweep_ds;
    for (int i = 5; i <= 100; ++i) sweep_ds.push_back(i / 100.0);
    const auto s = correlation_sweep(3.0, sweep_ds);
    o.check(std::abs(s.argmax_delta_n - 0.2821) <= 1e-3, "argmax " + fmt("%.5f", s.argmax_delta_n));
    return o;
}

Outcome eq13() {
    Outcome o;
    double worst = 0.0, worst_var = 0.0;
    for (double d : {0.25, 0.5, 1.0}) {
        const auto p = QuadratureQndParams::make(Resolution(d));
        const Observable x(op_x(p.dim));
        const FockState v = make_vacuum(p.dim);
        const double sd = std::sqrt(0.25 + d * d);
        for (int i = 0; i < 50; ++i) {
            const double xm = -3.0 * sd + 6.0 * sd * i / 49.0;
            worst = std::max(worst, std::abs(outcome_density(v, x, xm, Resolution(d)) - vac_outcome_density(p, xm)));
        }
        const auto curve = quadrature_curve(p, Path::matrix);
        std::vector<double> m2;
        for (const auto& s : curve) m2.push_back(s.density * s.a_m * s.a_m);
        worst_var = std::max(worst_var, std::abs(p.grid.trapezoid(m2) - (0.25 + d * d)));
    }
    o.check(worst <= 1e-8, "max density error " + fmt("%.2e", worst));
    o.check(worst_var <= 1e-8, "max variance error " + fmt("%.2e", worst_var));
    return o;
}

Outcome eq14() {
    Outcome o;
    const auto p = QuadratureQndParams::make(Resolution(1.0));
    const auto closed = quadrature_curve(p, Path::closed_form);
    const auto matrix = quadrature_curve(p, Path::matrix);
    double worst = 0.0;
    std::vector<double> p1;
    for (std::size_t i = 0; i < closed.size(); ++i) {
        worst = std::max(worst, std::abs(closed[i].post_value.real() - matrix[i].post_value.real()));
        p1.push_back(matrix[i].post_value.real());
    }
    o.check(worst <= 1e-8, "matrix vs closed P1 " + fmt("%.2e", worst));
    double left = 0.0, right = 0.0, best_l = -1.0, best_r = -1.0;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        const double x = p.grid.point(i);
        if (x < 0 && p1[i] > best_l) best_l = p1[i], left = x;
        if (x > 0 && p1[i] > best_r) best_r = p1[i], right = x;
    }
    const double peak = std::sqrt(1.0 + 8.0) / 2.0;
    o.check(std::abs(left + peak) <= p.grid.step() && std::abs(right - peak) <= p.grid.step(),
            "P1 maxima at " + fmt("%.3f", left) + ", " + fmt("%.3f", right));
    const auto total = jump_total_probability(p);
    o.check(std::abs(total.numeric.real() - std::sqrt(2.0) / 27.0) <= 1e-7,
            "total jump probability " + fmt("%.8f", total.numeric.real()));
    bool asym = true;
    for (double d : {5.0, 7.5, 10.0, 20.0}) {
        const double v = jump_total_probability_closed_form(Resolution(d)) * 16 * d * d;
        asym &= v >= 0.95 && v <= 1.0;
    }
    o.check(asym, "value*16dx^2 in [0.95, 1] for dx >= 5");
    return o;
}

Outcome eq16() {
    Outcome o;
    for (double d : {0.5, 1.0, 2.0}) {
        const auto r = field_jump_correlation(QuadratureQndParams::make(Resolution(d), std::nullopt, 128));
        o.check(std::abs(r.covariance.numeric.real() - 0.125) <= 1e-6,
                "dx=" + fmt("%g", d) + " covariance " + fmt("%.9f", r.covariance.numeric.real()));
    }
    const double x10 = op_x(128).matrix()(1, 0).real();
    const double op = operator_side_correlation(128);
    o.check(std::abs(0.25 * 2.0 * x10 * x10 - 0.125) < 1e-15 && std::abs(op - 0.125) < 1e-12,
            "operator side " + fmt("%.15f", op));
    return o;
}

Outcome completeness() {
    Outcome o;
    const Observable n(op_number(64));
    const double dn = completeness_check(n, spectrum_grid(n, Resolution(0.3)), Resolution(0.3));
    o.check(dn < 1e-8, "n deviation " + fmt("%.2e", dn));
    const Observable x(op_x(128));
    for (double d : {0.5, 1.0}) {
        const double dx = completeness_check(x, spectrum_grid(x, Resolution(d)), Resolution(d));
        o.check(dx < 1e-6, "x (dx=" + fmt("%g", d) + ") deviation " + fmt("%.2e", dx));
    }
    return o;
}

Outcome meter_equivalence() {
    Outcome o;
    const auto pn = check_pointer_equivalence(make_coherent(3.0, 64), Observable(op_number(64)), Resolution(0.3));
    o.check(pn.min_overlap >= 1.0 - 1e-4, "n overlap " + fmt("%.10f", pn.min_overlap));
    const auto px = check_pointer_equivalence(make_vacuum(128), Observable(op_x(128)), Resolution(0.5));
    o.check(px.min_overlap >= 1.0 - 1e-4, "x overlap " + fmt("%.10f", px.min_overlap));
    const std::vector<FockState> signals{make_vacuum(64), make_coherent(3.0, 64), make_number_state(5, 64)};
    const auto noise = check_noise_channel(signals, Observable(op_number(64)), Resolution(0.3));
    o.check(noise.min_unitary_overlap >= 1.0 - 1e-8, "noise overlap " + fmt("%.12f", noise.min_unitary_overlap));
    o.check(noise.max_weight_variation <= 1e-8, "noise TV " + fmt("%.2e", noise.max_weight_variation));
    return o;
}

Outcome determinism() {
    Outcome o;
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qnd_acceptance";
    fs::create_directories(dir);
    const auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream os;
        os << f.rdbuf();
        return os.str();
    };
    using cli::Command;
    for (Command cmd : {Command::photon_number, Command::quadrature, Command::sweep_correlation,
                        Command::povm_check, Command::meter_check}) {
        cli::RunConfig c;
        c.command = cmd;
        if (cmd == Command::sweep_correlation) c.delta_n = {0.05, 1.0, 0.01};
        std::string runs[2];
        for (int k = 0; k < 2; ++k) {
            c.out = (dir / ("run" + std::to_string(k) + ".csv")).string();
            std::ostringstream log;
            const int code = cli::run(c, std::cout, log);
            if (code != cli::kOk) o.check(false, std::string(cli::command_name(cmd)) + " exit " + std::to_string(code));
            runs[k] = slurp(*c.out) + slurp(dir / ("run" + std::to_string(k) + ".summary.json"));
        }
        o.check(!runs[0].empty() && runs[0] == runs[1], std::string(cli::command_name(cmd)) + " identical");
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    // Optional argument: run only the criterion with this number.
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_s;  // 0 means no runtime bound
    };
    const std::vector<Criterion> criteria{
        {"1 dephasing factor", dephasing, 10.0},
        {"2 photon-number statistics peaks", fig2, 5.0},
        {"3 quantization/coherence correlation", eq12, 10.0},
        {"4 correlation versus resolution", fig3, 5.0},
        {"5 vacuum quadrature density", eq13, 0.0},
        {"6 quantum jump probability", eq14, 0.0},
        {"7 field/jump covariance", eq16, 60.0},
        {"8 measurement completeness", completeness, 0.0},
        {"9 meter equivalence", meter_equivalence, 0.0},
        {"10 determinism", determinism, 0.0},
    };
    int failed = 0;
    int ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        if (only != 0 && only != static_cast<int>(i) + 1) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0) o.check(secs < c.budget_s, "runtime " + fmt("%.2f s", secs) + " < " + fmt("%g s", c.budget_s));
        else o.detail += "; runtime " + fmt("%.2f s", secs);
        std::printf("%s [%s] %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
