#include "cpreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace cpreg
{

const char* error_code_name(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::ok:
        return "ok";
    case ErrorCode::internal:
        return "internal";
    case ErrorCode::usage:
        return "usage";
    case ErrorCode::file_not_found:
        return "file_not_found";
    case ErrorCode::missing_column:
        return "missing_column";
    case ErrorCode::no_usable_rows:
        return "no_usable_rows";
    case ErrorCode::zero_variance:
        return "zero_variance";
    case ErrorCode::invalid_input:
        return "invalid_input";
    }
    return "unknown";
}

std::vector<std::string> parse_csv_record(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        const char c = line[i];
        if (quoted)
        {
            if (c == '"')
            {
                if (i + 1 < line.size() && line[i + 1] == '"')
                {
                    cur.push_back('"');
                    ++i;
                }
                else
                    quoted = false;
            }
            else
                cur.push_back(c);
        }
        else if (c == '"')
            quoted = true;
        else if (c == ',')
        {
            fields.push_back(std::move(cur));
            cur.clear();
        }
        else if (c != '\r')
            cur.push_back(c);
    }
    fields.push_back(std::move(cur));
    return fields;
}

CsvTable read_csv(std::istream& in)
{
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line))
    {
        if (first)
        {
            if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
                line.erase(0, 3);
            table.header = parse_csv_record(line);
            first = false;
            continue;
        }
        if (line.empty() || line == "\r")
            continue;
        table.rows.push_back(parse_csv_record(line));
    }
    return table;
}

namespace
{

std::optional<double> parse_number(const std::string& raw)
{
    std::size_t b = 0, e = raw.size();
    while (b < e && (raw[b] == ' ' || raw[b] == '\t'))
        ++b;
    while (e > b && (raw[e - 1] == ' ' || raw[e - 1] == '\t'))
        --e;
    if (b == e)
        return std::nullopt;
    const char* first = raw.data() + b;
    if (*first == '+')
        ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, raw.data() + e, v);
    if (ec != std::errc() || ptr != raw.data() + e || !std::isfinite(v))
        return std::nullopt;
    return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name)
{
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw CpregError(ErrorCode::missing_column, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace

LoadedData load_csv(const std::filesystem::path& path, const LoadSpec& spec)
{
    std::ifstream in(path);
    if (!in)
        throw CpregError(ErrorCode::file_not_found, "cannot open '" + path.string() + "'");
    const CsvTable table = read_csv(in);
    if (table.header.empty())
        throw CpregError(ErrorCode::no_usable_rows, "'" + path.string() + "' has no header row");

    const std::size_t yi = column_index(table.header, spec.response);
    std::optional<std::size_t> li;
    if (spec.index_column)
        li = column_index(table.header, *spec.index_column);

    std::vector<std::string> names = spec.covariates;
    if (names.empty())
        for (std::size_t c = 0; c < table.header.size(); ++c)
            if (c != yi && (!li || c != *li))
                names.push_back(table.header[c]);
    if (names.empty())
        throw CpregError(ErrorCode::missing_column, "no covariate columns selected");
    std::vector<std::size_t> xi;
    for (const auto& name : names)
        xi.push_back(column_index(table.header, name));

    std::vector<std::vector<double>> kept_x;
    std::vector<double> kept_y;
    std::vector<std::string> labels;
    std::size_t dropped = 0;
    for (const auto& row : table.rows)
    {
        auto cell = [&](std::size_t c) -> std::optional<double> {
            return c < row.size() ? parse_number(row[c]) : std::nullopt;
        };
        const auto y = cell(yi);
        std::vector<double> x;
        bool ok = y.has_value();
        for (std::size_t c : xi)
        {
            if (!ok)
                break;
            const auto v = cell(c);
            ok = v.has_value();
            if (ok)
                x.push_back(*v);
        }
        if (!ok)
        {
            ++dropped;
            continue;
        }
        kept_y.push_back(*y);
        kept_x.push_back(std::move(x));
        if (li)
            labels.push_back(*li < row.size() ? row[*li] : std::string());
    }
    if (kept_y.size() < 2)
        throw CpregError(ErrorCode::no_usable_rows,
                         "'" + path.string() + "' has " + std::to_string(kept_y.size()) + " usable rows, need at least 2");

    const auto n = static_cast<Index>(kept_y.size());
    const auto p = static_cast<Index>(names.size());
    Matrix X(n, p);
    Vector yv(n);
    for (Index t = 0; t < n; ++t)
    {
        yv(t) = kept_y[static_cast<std::size_t>(t)];
        for (Index j = 0; j < p; ++j)
            X(t, j) = kept_x[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
    }
    return {Dataset(std::move(X), std::move(yv)), std::move(names), std::move(labels), dropped};
}

std::pair<Dataset, double> standardize_response(const Dataset& data)
{
    const Vector& y = data.y();
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / static_cast<double>(data.n() - 1);
    if (!(var > 0.0))
        throw CpregError(ErrorCode::zero_variance, "response has zero variance");
    const double sd = std::sqrt(var);
    return {Dataset(data.X(), y / sd), sd};
}

Dataset standardize_covariates(const Dataset& data)
{
    Matrix X = data.X();
    for (Index j = 0; j < X.cols(); ++j)
    {
        const double mean = X.col(j).mean();
        X.col(j).array() -= mean;
        const double sd = std::sqrt(X.col(j).squaredNorm() / static_cast<double>(X.rows() - 1));
        if (sd > 0.0)
            X.col(j) /= sd;
    }
    return Dataset(std::move(X), data.y());
}

void write_csv(std::ostream& out, const Dataset& data, const std::vector<std::string>& covariate_names,
               const std::string& response_name)
{
    if (static_cast<Index>(covariate_names.size()) != data.p())
        throw ValidationError("write_csv: one name per covariate required");
    out << response_name;
    for (const auto& name : covariate_names)
        out << ',' << name;
    out << '\n';
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (Index t = 0; t < data.n(); ++t)
    {
        put(data.y()(t));
        for (Index j = 0; j < data.p(); ++j)
        {
            out << ',';
            put(data.X()(t, j));
        }
        out << '\n';
    }
}

} // namespace cpreg
