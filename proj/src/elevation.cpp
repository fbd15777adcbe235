#include "safegrid/elevation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <sstream>

#include "safegrid/errors.hpp"

namespace safegrid {

namespace {

double parse_cell(const std::string& token, int row, int col) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &pos);
    } catch (const std::exception&) {
        throw SpecError("elevation parse error at row " + std::to_string(row) +
                        ", column " + std::to_string(col) +
                        ": not a number: '" + token + "'");
    }
    while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
    if (pos != token.size() || !std::isfinite(value)) {
        throw SpecError("elevation parse error at row " + std::to_string(row) +
                        ", column " + std::to_string(col) +
                        ": not a number: '" + token + "'");
    }
    return value;
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

ElevationField ingest_csv(std::istream& in, double cell_size) {
    if (!(cell_size > 0.0)) {
        throw SpecError("elevation csv: cell_size must be positive");
    }
    ElevationField field;
    field.cell_size = cell_size;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (trimmed(line).empty()) continue;
        ++row;
        std::stringstream ls(line);
        std::string token;
        int col = 0;
        while (std::getline(ls, token, ',')) {
            ++col;
            field.values.push_back(parse_cell(trimmed(token), row, col));
        }
        if (row == 1) {
            field.width = col;
        } else if (col != field.width) {
            throw SpecError("elevation parse error at row " +
                            std::to_string(row) + ": expected " +
                            std::to_string(field.width) + " columns, found " +
                            std::to_string(col));
        }
        ++field.height;
    }
    if (field.height == 0) throw SpecError("elevation csv: empty input");
    return field;
}

ElevationField ingest_esri(std::istream& in) {
    int ncols = -1, nrows = -1;
    double cellsize = 0.0, nodata = 0.0;
    bool has_nodata = false;
    static const char* required[] = {"ncols", "nrows", "xllcorner",
                                     "yllcorner", "cellsize"};
    std::string key;
    for (int i = 0; i < 6; ++i) {
        if (!(in >> key)) {
            throw SpecError("esri_ascii: truncated header, expected key '" +
                            std::string(i < 5 ? required[i] : "NODATA_value") +
                            "'");
        }
        std::string lower = key;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        double value = 0.0;
        if (!(in >> value)) {
            throw SpecError("esri_ascii: header key '" + key +
                            "' has no numeric value");
        }
        if (lower == "ncols") ncols = static_cast<int>(value);
        else if (lower == "nrows") nrows = static_cast<int>(value);
        else if (lower == "cellsize") cellsize = value;
        else if (lower == "nodata_value") { nodata = value; has_nodata = true; }
        else if (lower != "xllcorner" && lower != "yllcorner") {
            throw SpecError("esri_ascii: unexpected header key '" + key + "'");
        }
    }
    if (ncols <= 0 || nrows <= 0) {
        throw SpecError("esri_ascii: ncols/nrows must be positive");
    }
    if (!(cellsize > 0.0)) {
        throw SpecError("esri_ascii: cellsize must be positive");
    }

    ElevationField field;
    field.width = ncols;
    field.height = nrows;
    field.cell_size = cellsize;
    field.values.reserve(static_cast<std::size_t>(ncols) * nrows);
    for (int r = 0; r < nrows; ++r) {
        for (int c = 0; c < ncols; ++c) {
            std::string token;
            if (!(in >> token)) {
                throw SpecError("esri_ascii: truncated data at row " +
                                std::to_string(r + 1) + ", column " +
                                std::to_string(c + 1));
            }
            const double v = parse_cell(token, r + 1, c + 1);
            if (has_nodata && v == nodata) {
                throw SpecError("esri_ascii: NODATA cell at row " +
                                std::to_string(r + 1) + ", column " +
                                std::to_string(c + 1));
            }
            field.values.push_back(v);
        }
    }
    std::string extra;
    if (in >> extra) {
        throw SpecError("esri_ascii: trailing data after " +
                        std::to_string(nrows) + "x" + std::to_string(ncols) +
                        " values: '" + extra + "'");
    }
    return field;
}

}  // namespace

ElevationFormat elevation_format_from_name(const std::string& name) {
    if (name == "csv") return ElevationFormat::csv;
    if (name == "esri_ascii") return ElevationFormat::esri_ascii;
    throw SpecError("unknown elevation format: '" + name +
                    "' (expected csv or esri_ascii)");
}

ElevationField ingest_elevation_grid(std::istream& source,
                                     ElevationFormat format,
                                     double csv_cell_size) {
    switch (format) {
        case ElevationFormat::csv: return ingest_csv(source, csv_cell_size);
        case ElevationFormat::esri_ascii: return ingest_esri(source);
    }
    throw SpecError("unknown elevation format");
}

std::vector<double> slope_safety_from_elevation(const ElevationField& elev) {
    if (elev.width < 2 || elev.height < 2) {
        throw std::invalid_argument(
            "slope_safety_from_elevation: field must be at least 2x2");
    }
    const GridWorld world = elev.make_world();
    std::vector<double> safety(world.size(), 0.0);
    for (int i = 0; i < world.size(); ++i) {
        const State s = world.state(i);
        double worst = 0.0;
        for (Action a : {Action::up, Action::right, Action::down, Action::left}) {
            const State t = world.transition(s, a);
            if (t == s) continue;
            const double rise = std::abs(elev.values[world.index(t)] - elev.values[i]);
            worst = std::max(worst, rise / elev.cell_size);
        }
        safety[i] = -worst;
    }
    return safety;
}

}  // namespace safegrid
