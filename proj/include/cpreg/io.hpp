#pragma once

#include "cpreg/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpreg
{

/// Process exit codes, one per error class.
enum class ErrorCode : int
{
    ok = 0,
    internal = 1,
    usage = 2,
    file_not_found = 3,
    missing_column = 4,
    no_usable_rows = 5,
    zero_variance = 6,
    invalid_input = 7,
};

const char* error_code_name(ErrorCode code);

/// An error that maps to a distinct exit code.
class CpregError : public std::runtime_error
{
public:
    CpregError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

/// Splits one CSV record. Fields may be wrapped in double quotes; "" inside quotes is a literal quote.
std::vector<std::string> parse_csv_record(const std::string& line);

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);

struct LoadSpec
{
    std::string response;
    /// Empty selects every column except the response and the index column.
    std::vector<std::string> covariates;
    std::optional<std::string> index_column;
};

struct LoadedData
{
    Dataset data;
    std::vector<std::string> covariate_names;
    /// Index-column value of each kept row (empty without an index column).
    std::vector<std::string> labels;
    std::size_t dropped_rows = 0;
};

/// Reads a comma-separated file with a header row. Rows with an empty or non-numeric cell in any
/// selected column are dropped.
LoadedData load_csv(const std::filesystem::path& path, const LoadSpec& spec);

/// Divides y by its sample standard deviation (n - 1 denominator); returns the data and that factor.
std::pair<Dataset, double> standardize_response(const Dataset& data);

/// Centers and scales every covariate column to unit sample variance; constant columns are only centered.
Dataset standardize_covariates(const Dataset& data);

void write_csv(std::ostream& out, const Dataset& data, const std::vector<std::string>& covariate_names,
               const std::string& response_name);

} // namespace cpreg
