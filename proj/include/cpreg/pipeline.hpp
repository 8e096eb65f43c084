#pragma once

#include "cpreg/io.hpp"
#include "cpreg/methods.hpp"
#include "cpreg/tuning.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cpreg
{

enum class TuningMode
{
    fixed,
    cv,
};

struct RunSpec
{
    std::filesystem::path input;
    std::string response;
    std::vector<std::string> covariates;
    std::optional<std::string> index_column;
    Method method = Method::dp;
    TuningMode tuning = TuningMode::fixed;
    std::optional<double> lambda, gamma, zeta;
    /// CV grid; TuningGrid::defaults when absent.
    std::optional<TuningGrid> grid;
    CvStrategy cv_strategy = CvStrategy::staged;
    bool standardize_response = true;
    bool standardize_covariates = false;
    std::uint64_t seed = 1;
    DetectionOptions options;
    /// Adds wall time to the diagnostics; off by default so reports are byte-stable.
    bool timing = false;

    void validate() const;
};

/// ingest -> standardize -> (cv | fixed) -> detect -> (refine) -> JSON report.
nlohmann::json run_pipeline(const RunSpec& spec);

/// Same as run_pipeline on an already loaded dataset.
nlohmann::json run_pipeline(const RunSpec& spec, const LoadedData& loaded);

/// The JSON error object written on failure.
nlohmann::json error_report(ErrorCode code, const std::string& message);

} // namespace cpreg
