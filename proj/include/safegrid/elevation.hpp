#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "safegrid/grid_world.hpp"

namespace safegrid {

enum class ElevationFormat { csv, esri_ascii };

ElevationFormat elevation_format_from_name(const std::string& name);

/// Rectangular grid of elevation values in meters. Row r of the file is
/// grid row r, so a value at (row r, column c) belongs to state
/// {x = c, y = r}.
struct ElevationField {
    int width = 0;
    int height = 0;
    double cell_size = 1.0;
    std::vector<double> values;  // row-major, height*width entries

    double at(int row, int col) const { return values[row * width + col]; }
    GridWorld make_world() const { return GridWorld(width, height, cell_size); }
};

/// Parses a CSV grid (one row per line, comma-separated decimals) or an
/// ESRI ASCII grid (ncols/nrows/xllcorner/yllcorner/cellsize/NODATA_value
/// header then row-major values). For CSV the cell size comes from
/// `csv_cell_size`; the ESRI header's cellsize wins for that format.
/// Ragged rows, non-numeric cells, NODATA values and malformed headers
/// raise SpecError naming the offending row/column.
ElevationField ingest_elevation_grid(std::istream& source,
                                     ElevationFormat format,
                                     double csv_cell_size = 1.0);

/// Per-state safety field: g(s) is the negated worst rise-over-run slope
/// against the 4-neighborhood, so g(s) >= -tan(25 deg) forbids slopes
/// steeper than 25 degrees. Requires at least a 2x2 field.
std::vector<double> slope_safety_from_elevation(const ElevationField& elev);

}  // namespace safegrid
