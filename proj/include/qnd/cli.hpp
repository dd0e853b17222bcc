#pragma once

// Command-line front end. Data goes to --out (or the data stream when no
// path is given); every command also produces a summary object, written as
// <out stem>.summary.json next to CSV output, embedded in JSON output, or
// printed to the log stream when writing to the data stream.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qnd::cli {

enum class Command { photon_number, quadrature, sweep_correlation, meter_check, povm_check };
enum class Format { csv, json };

enum ExitCode : int {
    kOk = 0,
    kInvalidParameter = 2,
    kIoError = 3,
    kValidationFailure = 4,
};

struct Range {
    double lo;
    double hi;
    double step;

    // lo, lo+step, ... up to and including hi (within rounding).
    std::vector<double> values() const;
};

struct RunConfig {
    Command command = Command::photon_number;
    std::complex<double> alpha{3.0, 0.0};
    // A single value, or a range for sweep-correlation.
    Range delta_n{0.3, 0.3, 1.0};
    double delta_x = 1.0;
    std::optional<std::size_t> dim;
    std::size_t meter_dim = 128;
    std::optional<Range> grid;
    std::optional<std::string> out;
    Format format = Format::csv;
    // When set, correlation integrals halve the grid step until successive
    // values agree within this tolerance.
    std::optional<double> tolerance;
};

// "re", "re+imj" or "re-imj".
std::complex<double> parse_complex(std::string_view text);
// "lo:hi:step"
Range parse_range(std::string_view text);
std::string_view command_name(Command c);

// Validates the configuration against the target modules' preconditions
// before computing anything. Throws qnd::InvalidParameter.
void validate(const RunConfig& config);

// Runs one command. data receives output when config.out is empty; log
// receives progress and summaries. Returns an ExitCode.
int run(const RunConfig& config, std::ostream& data, std::ostream& log);

// Parses argv and calls run().
int main(int argc, char** argv);

}  // namespace qnd::cli
