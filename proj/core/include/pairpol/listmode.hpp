#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pairpol/apparatus.hpp"

namespace pairpol {

//! Column order of listmode CSV files
inline constexpr char const listmode_header[]
    = "class,counter1,counter2,e_gagg,e_plastic1,e_plastic2,e_nai1,e_nai2,"
      "true_dphi_deg";

// One CSV row (no newline); energies and angle with 3 decimals
std::string listmode_row(EventRecord const& e);

//! Streams accepted events to a listmode CSV file
class ListmodeWriter
{
  public:
    explicit ListmodeWriter(std::filesystem::path const& path);

    void write(std::span<EventRecord const> events);
    void close();

  private:
    std::filesystem::path path_;
    std::ofstream out_;
};

void write_listmode(std::filesystem::path const& path,
                    std::span<EventRecord const> events);

// Parse listmode rows; only the stored fields of each record are set
std::vector<EventRecord> read_listmode(std::istream& in);
std::vector<EventRecord> read_listmode(std::filesystem::path const& path);

}  // namespace pairpol
