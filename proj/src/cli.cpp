#include "qnd/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "qnd/experiments.hpp"
#include "qnd/fock.hpp"
#include "qnd/meter.hpp"
#include "qnd/povm.hpp"

#ifndef QND_VERSION
#define QND_VERSION "0.0.0"
#endif

namespace qnd::cli {

namespace {

using json = nlohmann::ordered_json;
using Cell = std::variant<double, std::string>;

// Validation tolerances for the exit-code-4 checks.
constexpr double kCurveTolerance = 1e-8;
constexpr double kCorrelationTolerance = 1e-6;
constexpr double kJumpTotalTolerance = 1e-7;
constexpr double kNumberCompleteness = 1e-8;
constexpr double kQuadratureCompleteness = 1e-6;
constexpr double kPointerOverlap = 1.0 - 1e-4;
constexpr double kPointerVariation = 2e-3;
constexpr double kNoiseOverlap = 1.0 - 1e-8;
constexpr double kNoiseDistribution = 1e-10;
constexpr double kNoiseVariation = 1e-8;
constexpr double kDephasingTolerance = 1e-6;
constexpr double kConservationTolerance = 1e-10;

struct Output {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    json summary = json::object();
    json tolerances = json::object();
    std::size_t dim = 0;
    std::optional<OutcomeGrid> grid;
    std::vector<std::string> failures;

    void require(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

// 17 significant digits, scientific, independent of the global locale.
std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
    return std::string(buf, r.ptr);
}

std::string format_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return nullptr;
        return *d;
    }
    return std::get<std::string>(c);
}

json grid_json(const OutcomeGrid& g) {
    return json{{"lo", g.lo()}, {"hi", g.hi()}, {"step", g.step()}, {"points", g.size()}};
}

json complex_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json report_json(const CorrelationReport& r) {
    return json{{"closed_form", complex_json(r.closed_form)},
                {"numeric", complex_json(r.numeric)},
                {"abs_error", r.abs_error},
                {"grid", grid_json(r.grid)},
                {"dim", r.dim}};
}

double single_delta_n(const RunConfig& c) { return c.delta_n.lo; }

std::string canonical(const RunConfig& c) {
    std::ostringstream os;
    os << command_name(c.command) << ';' << format_number(c.alpha.real()) << ';'
       << format_number(c.alpha.imag()) << ';' << format_number(c.delta_n.lo) << ':'
       << format_number(c.delta_n.hi) << ':' << format_number(c.delta_n.step) << ';'
       << format_number(c.delta_x) << ';' << (c.dim ? std::to_string(*c.dim) : "default") << ';'
       << c.meter_dim << ';';
    if (c.grid) {
        os << format_number(c.grid->lo) << ':' << format_number(c.grid->hi) << ':'
           << format_number(c.grid->step);
    } else {
        os << "default";
    }
    os << ';' << (c.tolerance ? format_number(*c.tolerance) : "default");
    return os.str();
}

// FNV-1a, 64 bit.
std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json config_json(const RunConfig& c) {
    json j{{"alpha", complex_json(c.alpha)},
           {"delta_n", {{"lo", c.delta_n.lo}, {"hi", c.delta_n.hi}, {"step", c.delta_n.step}}},
           {"delta_x", c.delta_x},
           {"dim", c.dim ? json(*c.dim) : json(nullptr)},
           {"meter_dim", c.meter_dim}};
    j["grid"] = c.grid ? json{{"lo", c.grid->lo}, {"hi", c.grid->hi}, {"step", c.grid->step}} : json(nullptr);
    j["tolerance"] = c.tolerance ? json(*c.tolerance) : json(nullptr);
    return j;
}

std::optional<OutcomeGrid> user_grid(const RunConfig& c) {
    if (!c.grid) return std::nullopt;
    return OutcomeGrid(c.grid->lo, c.grid->hi, c.grid->step);
}

// Halves the grid step until two successive values agree within tolerance.
template <typename Compute>
CorrelationReport converge(Compute&& compute, OutcomeGrid grid, std::optional<double> tolerance) {
    CorrelationReport r = compute(grid);
    if (!tolerance) return r;
    for (int i = 0; i < 10; ++i) {
        grid = grid.refined();
        CorrelationReport next = compute(grid);
        const double change = std::abs(next.numeric - r.numeric);
        r = std::move(next);
        if (change < *tolerance) break;
    }
    return r;
}

// ---------- commands ----------

Output run_photon_number(const RunConfig& c) {
    const Resolution dn(single_delta_n(c));
    const auto params = PhotonNumberQndParams::make(c.alpha, dn, user_grid(c), c.dim);
    const auto closed = photon_number_curve(params, Path::closed_form);
    const auto matrix = photon_number_curve(params, Path::matrix);

    Output out;
    out.columns = {"n_m", "density", "re_a_f", "im_a_f", "abs_a_f"};
    out.dim = params.dim;
    out.grid = params.grid;
    double density_dev = 0.0;
    double coherence_dev = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i) {
        const auto& s = closed[i];
        out.rows.push_back({s.a_m, s.density, s.post_value.real(), s.post_value.imag(), std::abs(s.post_value)});
        density_dev = std::max(density_dev, std::abs(s.density - matrix[i].density));
        if (std::isfinite(s.post_value.real()) && std::isfinite(matrix[i].post_value.real())) {
            coherence_dev = std::max(coherence_dev, std::abs(s.post_value - matrix[i].post_value));
        }
    }
    out.require(density_dev <= kCurveTolerance, "closed-form and matrix P(n_m) disagree");
    out.require(coherence_dev <= kCurveTolerance, "closed-form and matrix <a>_f disagree");

    const auto corr_params = PhotonNumberQndParams::make(c.alpha, dn, std::nullopt, c.dim);
    const auto report = converge(
        [&](const OutcomeGrid& g) {
            return quantization_coherence_correlation(
                PhotonNumberQndParams{corr_params.alpha, dn, g, corr_params.dim});
        },
        corr_params.grid, c.tolerance);
    out.require(report.abs_error <= kCorrelationTolerance,
                "quantization/coherence correlation misses its closed form");

    out.summary = json{{"dephasing_factor", dephasing_factor(dn)},
                       {"phase_noise", phase_noise(dn)},
                       {"quantization_coherence_correlation", report_json(report)},
                       {"max_density_deviation", density_dev},
                       {"max_coherence_deviation", coherence_dev}};
    out.tolerances = json{{"curve", kCurveTolerance}, {"correlation", kCorrelationTolerance}};
    return out;
}

Output run_quadrature(const RunConfig& c) {
    const Resolution dx(c.delta_x);
    const auto params = QuadratureQndParams::make(dx, user_grid(c), c.dim);
    const auto closed = quadrature_curve(params, Path::closed_form);
    const auto matrix = quadrature_curve(params, Path::matrix);

    Output out;
    out.columns = {"x_m", "p_total", "p_total_over_16", "p1"};
    out.dim = params.dim;
    out.grid = params.grid;
    double density_dev = 0.0;
    double jump_dev = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i) {
        const auto& s = closed[i];
        out.rows.push_back({s.a_m, s.density, s.density / 16.0, s.post_value.real()});
        density_dev = std::max(density_dev, std::abs(s.density - matrix[i].density));
        jump_dev = std::max(jump_dev, std::abs(s.post_value - matrix[i].post_value));
    }
    out.require(density_dev <= kCurveTolerance, "closed-form and matrix P(x_m) disagree");
    out.require(jump_dev <= kCurveTolerance, "closed-form and matrix P_1(x_m) disagree");

    const auto base = QuadratureQndParams::make(dx, std::nullopt, c.dim);
    const auto jump = converge(
        [&](const OutcomeGrid& g) { return jump_total_probability(QuadratureQndParams{dx, g, base.dim}); },
        base.grid, c.tolerance);
    FieldJumpReport field = field_jump_correlation(base);
    if (c.tolerance) {
        OutcomeGrid g = base.grid;
        for (int i = 0; i < 10; ++i) {
            g = g.refined();
            FieldJumpReport next = field_jump_correlation(QuadratureQndParams{dx, g, base.dim});
            const double change = std::abs(next.covariance.numeric - field.covariance.numeric);
            field = next;
            if (change < *c.tolerance) break;
        }
    }
    out.require(jump.abs_error <= kJumpTotalTolerance, "total jump probability misses its closed form");
    out.require(field.covariance.abs_error <= kCorrelationTolerance, "C(x_m^2; <n>_f) differs from 1/8");

    const double d = dx.value();
    out.summary = json{{"jump_total_probability", report_json(jump)},
                       {"jump_total_asymptote", 1.0 / (16.0 * d * d)},
                       {"jump_total_times_16_dx2", jump.closed_form.real() * 16.0 * d * d},
                       {"jump_peak_position", jump_peak_position(dx)},
                       {"field_jump_covariance", report_json(field.covariance)},
                       {"unsubtracted_integral", field.unsubtracted},
                       {"unsubtracted_closed_form", field.unsubtracted_closed_form},
                       {"mean_photons_after", field.mean_photons},
                       {"mean_photons_closed_form", field.mean_photons_closed_form},
                       {"operator_side_correlation", operator_side_correlation(base.dim)},
                       {"max_density_deviation", density_dev},
                       {"max_jump_deviation", jump_dev}};
    out.tolerances = json{{"curve", kCurveTolerance},
                          {"correlation", kCorrelationTolerance},
                          {"jump_total", kJumpTotalTolerance}};
    return out;
}

Output run_sweep(const RunConfig& c) {
    const auto deltas = c.delta_n.values();
    SweepResult sweep = correlation_sweep(c.alpha, deltas);
    if (c.tolerance) {
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            const Resolution dn(deltas[i]);
            const auto params = PhotonNumberQndParams::make(c.alpha, dn);
            sweep.reports[i] = converge(
                [&](const OutcomeGrid& g) {
                    return quantization_coherence_correlation(PhotonNumberQndParams{c.alpha, dn, g, params.dim});
                },
                params.grid, c.tolerance);
        }
    }

    const bool complex_alpha = c.alpha.imag() != 0.0;
    Output out;
    out.columns = {"delta_n", "c_closed", "c_numeric", "abs_err"};
    if (complex_alpha) {
        out.columns.push_back("c_closed_im");
        out.columns.push_back("c_numeric_im");
    }
    out.dim = sweep.reports.front().dim;
    double worst = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const auto& r = sweep.reports[i];
        std::vector<Cell> row{deltas[i], r.closed_form.real(), r.numeric.real(), r.abs_error};
        if (complex_alpha) {
            row.emplace_back(r.closed_form.imag());
            row.emplace_back(r.numeric.imag());
        }
        out.rows.push_back(std::move(row));
        worst = std::max(worst, r.abs_error);
    }
    out.require(worst <= kCorrelationTolerance, "swept correlation misses its closed form");
    out.summary = json{{"argmax_delta_n", sweep.argmax_delta_n},
                       {"exact_peak_delta_n", correlation_peak_resolution()},
                       {"max_abs_error", worst}};
    out.tolerances = json{{"correlation", kCorrelationTolerance}};
    return out;
}

Output run_meter_check(const RunConfig& c, std::ostream& log) {
    const Resolution dn(single_delta_n(c));
    const Resolution dx(c.delta_x);
    const std::size_t number_dim = c.dim ? *c.dim : default_coherent_dim(c.alpha);
    const std::size_t quad_dim = c.dim ? *c.dim : kQuadratureDim;
    MeterConfig meter;
    meter.dim_m = c.meter_dim;

    Output out;
    out.columns = {"check", "value", "threshold", "relation", "pass"};
    out.dim = number_dim;
    auto add = [&](const std::string& name, double value, double threshold, bool at_least) {
        const bool pass = at_least ? value >= threshold : value <= threshold;
        out.rows.push_back({name, value, threshold, std::string(at_least ? "ge" : "le"), pass ? 1.0 : 0.0});
        out.require(pass, name);
    };

    const FockState coherent = make_coherent(c.alpha, number_dim);
    const Observable number(op_number(number_dim));
    log << "meter-check: photon-number pointer readout\n";
    const auto pn = check_pointer_equivalence(coherent, number, dn, meter);
    add("number_pointer_min_overlap", pn.min_overlap, kPointerOverlap, true);
    add("number_pointer_total_variation", pn.total_variation, kPointerVariation, false);

    log << "meter-check: quadrature pointer readout\n";
    const FockState vacuum = make_vacuum(quad_dim);
    const Observable x(op_x(quad_dim));
    const auto qx = check_pointer_equivalence(vacuum, x, dx, meter);
    add("quadrature_pointer_min_overlap", qx.min_overlap, kPointerOverlap, true);
    add("quadrature_pointer_total_variation", qx.total_variation, kPointerVariation, false);

    log << "meter-check: noise readout\n";
    const std::vector<FockState> signals{make_vacuum(number_dim), coherent,
                                         make_number_state(std::min<std::size_t>(5, number_dim - 1), number_dim)};
    const auto noise = check_noise_channel(signals, number, dn, meter);
    add("noise_min_unitary_overlap", noise.min_unitary_overlap, kNoiseOverlap, true);
    add("noise_max_distribution_change", noise.max_distribution_change, kNoiseDistribution, false);
    add("noise_weight_total_variation", noise.max_weight_variation, kNoiseVariation, false);

    log << "meter-check: back-action on the coherent amplitude\n";
    const JointState joint = couple(coherent, number, dn, meter);
    const Matrix rho = joint.reduced_signal();
    const Matrix a = op_annihilate(number_dim).matrix();
    const Matrix n = op_number(number_dim).matrix();
    const double amp_out = std::abs((rho * a).trace());
    add("dephasing_error", std::abs(amp_out - dephasing_factor(dn) * std::abs(c.alpha)), kDephasingTolerance,
        false);
    const double mean_in = expectation(coherent, op_number(number_dim)).real();
    const double var_in = coherent.amplitudes().dot(n * n * coherent.amplitudes()).real() - mean_in * mean_in;
    const double mean_out = (rho * n).trace().real();
    const double var_out = (rho * n * n).trace().real() - mean_out * mean_out;
    add("qnd_mean_change", std::abs(mean_out - mean_in), kConservationTolerance, false);
    add("qnd_variance_change", std::abs(var_out - var_in), kConservationTolerance, false);

    out.summary = json{{"number_meter_dim", pn.dim_m},
                       {"number_outcomes_checked", pn.outcomes_checked},
                       {"quadrature_meter_dim", qx.dim_m},
                       {"quadrature_outcomes_checked", qx.outcomes_checked},
                       {"noise_meter_dim", noise.dim_m},
                       {"reduced_amplitude", amp_out},
                       {"expected_amplitude", dephasing_factor(dn) * std::abs(c.alpha)}};
    out.tolerances = json{{"pointer_overlap", kPointerOverlap},
                          {"pointer_total_variation", kPointerVariation},
                          {"noise_overlap", kNoiseOverlap},
                          {"noise_distribution", kNoiseDistribution},
                          {"noise_total_variation", kNoiseVariation},
                          {"dephasing", kDephasingTolerance},
                          {"conservation", kConservationTolerance}};
    return out;
}

Output run_povm_check(const RunConfig& c) {
    const Resolution dn(single_delta_n(c));
    const Resolution dx(c.delta_x);
    const std::size_t number_dim = c.dim ? *c.dim : default_coherent_dim(c.alpha);
    const std::size_t quad_dim = c.dim ? *c.dim : kQuadratureDim;

    Output out;
    out.columns = {"observable", "dim", "delta", "grid_lo", "grid_hi", "grid_step", "deviation", "threshold", "pass"};
    out.dim = number_dim;
    auto add = [&](const std::string& name, const Observable& obs, Resolution d, double threshold) {
        const OutcomeGrid g = c.grid ? OutcomeGrid(c.grid->lo, c.grid->hi, c.grid->step) : spectrum_grid(obs, d);
        const double dev = completeness_check(obs, g, d);
        const bool pass = dev < threshold;
        out.rows.push_back({name, static_cast<double>(obs.dim()), d.value(), g.lo(), g.last(), g.step(), dev,
                            threshold, pass ? 1.0 : 0.0});
        out.require(pass, name + " completeness");
    };
    add("number", Observable(op_number(number_dim)), dn, kNumberCompleteness);
    add("quadrature", Observable(op_x(quad_dim)), dx, kQuadratureCompleteness);
    out.tolerances = json{{"number", kNumberCompleteness}, {"quadrature", kQuadratureCompleteness}};
    return out;
}

// ---------- output ----------

void write_csv(std::ostream& os, const Output& out) {
    for (std::size_t i = 0; i < out.columns.size(); ++i) os << (i ? "," : "") << out.columns[i];
    os << '\n';
    for (const auto& row : out.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
        os << '\n';
    }
}

json metadata_json(const RunConfig& c, const Output& out) {
    json m{{"library_version", QND_VERSION},
           {"command", std::string(command_name(c.command))},
           {"config_hash", config_hash(c)},
           {"config", config_json(c)},
           {"dim", out.dim}};
    m["grid"] = out.grid ? grid_json(*out.grid) : json(nullptr);
    m["tolerances"] = out.tolerances;
    return m;
}

json full_json(const RunConfig& c, const Output& out) {
    json rows = json::array();
    for (const auto& row : out.rows) {
        json r = json::array();
        for (const auto& cell : row) r.push_back(cell_json(cell));
        rows.push_back(std::move(r));
    }
    json failures = json::array();
    for (const auto& f : out.failures) failures.push_back(f);
    return json{{"metadata", metadata_json(c, out)},
                {"columns", out.columns},
                {"rows", std::move(rows)},
                {"summary", out.summary},
                {"validation_failures", std::move(failures)}};
}

json summary_json(const RunConfig& c, const Output& out) {
    json failures = json::array();
    for (const auto& f : out.failures) failures.push_back(f);
    return json{{"metadata", metadata_json(c, out)},
                {"summary", out.summary},
                {"validation_failures", std::move(failures)}};
}

bool write_file(const std::filesystem::path& path, const std::string& content, std::ostream& log) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        log << "error: cannot open " << path.string() << " for writing\n";
        return false;
    }
    f << content;
    f.flush();
    if (!f) {
        log << "error: failed writing " << path.string() << '\n';
        return false;
    }
    return true;
}

int emit(const RunConfig& c, const Output& out, std::ostream& data, std::ostream& log) {
    std::ostringstream body;
    if (c.format == Format::csv) {
        write_csv(body, out);
    } else {
        body << full_json(c, out).dump(2) << '\n';
    }

    if (!c.out) {
        data << body.str();
        if (c.format == Format::csv) log << summary_json(c, out).dump() << '\n';
    } else {
        const std::filesystem::path path(*c.out);
        if (!write_file(path, body.str(), log)) return kIoError;
        if (c.format == Format::csv) {
            std::filesystem::path summary = path;
            summary.replace_extension(".summary.json");
            if (!write_file(summary, summary_json(c, out).dump(2) + "\n", log)) return kIoError;
        }
    }

    for (const auto& f : out.failures) log << "validation failure: " << f << '\n';
    return out.failures.empty() ? kOk : kValidationFailure;
}

}  // namespace

// ---------- parsing ----------

std::vector<double> Range::values() const {
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> v(count + 1);
    for (std::size_t i = 0; i <= count; ++i) v[i] = lo + static_cast<double>(i) * step;
    return v;
}

namespace {

double parse_double(std::string_view text, const char* what) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto r = std::from_chars(first, last, v);
    if (text.empty() || r.ec != std::errc() || r.ptr != last) {
        throw InvalidParameter(std::string("cannot parse ") + what + " from '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

std::complex<double> parse_complex(std::string_view text) {
    if (text.empty()) throw InvalidParameter("empty complex number");
    if (text.back() != 'j') return {parse_double(text, "real number"), 0.0};
    // Split at the last sign that is not a leading sign or an exponent sign.
    std::size_t split = std::string_view::npos;
    for (std::size_t i = text.size() - 1; i > 0; --i) {
        if ((text[i] == '+' || text[i] == '-') && text[i - 1] != 'e' && text[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string_view::npos) {
        throw InvalidParameter("complex number must look like re or re+imj, got '" + std::string(text) + "'");
    }
    const double re = parse_double(text.substr(0, split), "real part");
    const double im = parse_double(text.substr(split, text.size() - split - 1), "imaginary part");
    return {re, im};
}

Range parse_range(std::string_view text) {
    const auto a = text.find(':');
    const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
    if (a == std::string_view::npos || b == std::string_view::npos) {
        throw InvalidParameter("range must look like lo:hi:step, got '" + std::string(text) + "'");
    }
    return Range{parse_double(text.substr(0, a), "range lo"), parse_double(text.substr(a + 1, b - a - 1), "range hi"),
                 parse_double(text.substr(b + 1), "range step")};
}

std::string_view command_name(Command c) {
    switch (c) {
        case Command::photon_number: return "photon-number";
        case Command::quadrature: return "quadrature";
        case Command::sweep_correlation: return "sweep-correlation";
        case Command::meter_check: return "meter-check";
        case Command::povm_check: return "povm-check";
    }
    return "unknown";
}

void validate(const RunConfig& c) {
    if (!std::isfinite(c.alpha.real()) || !std::isfinite(c.alpha.imag())) {
        throw InvalidParameter("--alpha must be finite");
    }
    const Range& r = c.delta_n;
    if (!(r.lo > 0.0) || !std::isfinite(r.lo) || !std::isfinite(r.hi) || r.hi < r.lo) {
        throw InvalidParameter("--delta-n must be positive (range lo > 0 and hi >= lo)");
    }
    if (r.hi > r.lo && (!(r.step > 0.0) || !std::isfinite(r.step))) {
        throw InvalidParameter("--delta-n range step must be positive");
    }
    if (c.command == Command::sweep_correlation && r.hi > r.lo && (r.hi - r.lo) / r.step > 1e5) {
        throw InvalidParameter("--delta-n range has more than 1e5 points");
    }
    if (c.command != Command::sweep_correlation && r.hi != r.lo) {
        throw InvalidParameter("--delta-n range syntax is only accepted by sweep-correlation");
    }
    Resolution{c.delta_x};
    if (c.dim && *c.dim < 2) throw InvalidParameter("--dim must be at least 2");
    if (c.meter_dim < kMinMeterDim) {
        throw InvalidParameter("--meter-dim must be at least " + std::to_string(kMinMeterDim));
    }
    if (c.grid) OutcomeGrid(c.grid->lo, c.grid->hi, c.grid->step);
    if (c.tolerance && (!(*c.tolerance > 0.0) || !std::isfinite(*c.tolerance))) {
        throw InvalidParameter("--tolerance must be positive");
    }
    if (c.command == Command::quadrature || c.command == Command::povm_check ||
        c.command == Command::meter_check) {
        if (c.dim && *c.dim < kQuadratureDim) {
            throw InvalidParameter("--dim must be at least " + std::to_string(kQuadratureDim) +
                                   " for quadrature measurements");
        }
    }
}

int run(const RunConfig& config, std::ostream& data, std::ostream& log) {
    try {
        validate(config);
        Output out;
        switch (config.command) {
            case Command::photon_number: out = run_photon_number(config); break;
            case Command::quadrature: out = run_quadrature(config); break;
            case Command::sweep_correlation: out = run_sweep(config); break;
            case Command::meter_check: out = run_meter_check(config, log); break;
            case Command::povm_check: out = run_povm_check(config); break;
        }
        return emit(config, out, data, log);
    } catch (const InvalidParameter& e) {
        log << "invalid parameter: " << e.what() << '\n';
        return kInvalidParameter;
    } catch (const Error& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kValidationFailure;
    } catch (const std::filesystem::filesystem_error& e) {
        log << "error: " << e.what() << '\n';
        return kIoError;
    }
}

int main(int argc, char** argv) {
    CLI::App app{"Finite-resolution QND measurement simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", QND_VERSION);

    struct Raw {
        std::string alpha = "3";
        std::optional<std::string> delta_n;
        double delta_x = 1.0;
        std::optional<std::size_t> dim;
        std::size_t meter_dim = kDefaultMeterDim;
        std::optional<std::string> grid;
        std::optional<std::string> out;
        std::string format = "csv";
        std::optional<double> tolerance;
    } raw;

    auto add_common = [&raw](CLI::App* sub) {
        sub->add_option("--alpha", raw.alpha, "coherent amplitude, re or re+imj")->capture_default_str();
        sub->add_option("--delta-n", raw.delta_n, "photon-number resolution (lo:hi:step for sweeps)");
        sub->add_option("--delta-x", raw.delta_x, "quadrature resolution")->capture_default_str();
        sub->add_option("--dim", raw.dim, "signal Fock truncation");
        sub->add_option("--meter-dim", raw.meter_dim, "initial meter truncation")->capture_default_str();
        sub->add_option("--grid", raw.grid, "outcome grid lo:hi:step");
        sub->add_option("--out", raw.out, "output path (default: standard output)");
        sub->add_option("--format", raw.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        sub->add_option("--tolerance", raw.tolerance, "refine correlation grids until converged to this");
    };

    const std::pair<Command, const char*> commands[] = {
        {Command::photon_number, "P(n_m) and <a>_f(n_m) for a coherent state"},
        {Command::quadrature, "P(x_m) and jump density P_1(x_m) for the vacuum"},
        {Command::sweep_correlation, "quantization/coherence correlation versus delta_n"},
        {Command::meter_check, "two-mode meter model against the generalized measurement"},
        {Command::povm_check, "completeness of the measurement operators"},
    };
    std::vector<std::pair<Command, CLI::App*>> subs;
    for (const auto& [cmd, help] : commands) {
        auto* sub = app.add_subcommand(std::string(command_name(cmd)), help);
        add_common(sub);
        subs.emplace_back(cmd, sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalidParameter;
    }

    RunConfig config;
    try {
        for (const auto& [cmd, sub] : subs) {
            if (sub->parsed()) config.command = cmd;
        }
        config.alpha = parse_complex(raw.alpha);
        if (raw.delta_n) {
            if (raw.delta_n->find(':') != std::string::npos) {
                config.delta_n = parse_range(*raw.delta_n);
            } else {
                const double v = parse_complex(*raw.delta_n).real();
                config.delta_n = Range{v, v, 1.0};
            }
        } else if (config.command == Command::sweep_correlation) {
            config.delta_n = Range{0.05, 1.0, 0.01};
        }
        config.delta_x = raw.delta_x;
        config.dim = raw.dim;
        config.meter_dim = raw.meter_dim;
        if (raw.grid) config.grid = parse_range(*raw.grid);
        config.out = raw.out;
        config.format = raw.format == "json" ? Format::json : Format::csv;
        config.tolerance = raw.tolerance;
    } catch (const InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kInvalidParameter;
    }
    return run(config, std::cout, std::cerr);
}

}  // namespace qnd::cli
