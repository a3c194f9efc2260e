#pragma once

#include <string>

#include "nvlac/csv.hpp"
#include "nvlac/spectra.hpp"

// CSV import/export for spectra, header `freq_mhz,intensity`.

namespace nvlac {

inline csv::Table spectrum_to_table(const Spectrum& spectrum) {
  spectrum.validate();
  csv::Table table;
  table.header = {"freq_mhz", "intensity"};
  for (std::size_t i = 0; i < spectrum.frequencies.size(); ++i) {
    table.rows.push_back({spectrum.frequencies[i], spectrum.intensities[i]});
  }
  return table;
}

inline Spectrum spectrum_from_table(const csv::Table& table) {
  const std::size_t col_f = table.column("freq_mhz");
  const std::size_t col_i = table.column("intensity");
  Spectrum spectrum;
  spectrum.frequencies.reserve(table.rows.size());
  spectrum.intensities.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    spectrum.frequencies.push_back(row[col_f]);
    spectrum.intensities.push_back(row[col_i]);
  }
  spectrum.validate();
  return spectrum;
}

inline void write_spectrum_csv(const Spectrum& spectrum, const std::string& path) {
  csv::write_file(spectrum_to_table(spectrum), path);
}

inline Spectrum read_spectrum_csv(const std::string& path) {
  return spectrum_from_table(csv::read_file(path));
}

}  // namespace nvlac
