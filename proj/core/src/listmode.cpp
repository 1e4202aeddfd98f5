#include "pairpol/listmode.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <string_view>

#include "pairpol/errors.hpp"

namespace pairpol {
namespace {

constexpr double rad_to_deg = 180.0 / pi;

template<class T>
T parse_field(std::string_view field, std::size_t line, char const* name)
{
    T value{};
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    {
        throw IoError("listmode line " + std::to_string(line) + ": bad " + name
                      + " '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

std::string listmode_row(EventRecord const& e)
{
    char buf[256];
    int const n = std::snprintf(buf,
                                sizeof(buf),
                                "%s,%d,%d,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f",
                                std::string(to_string(e.class_tag)).c_str(),
                                e.counter1,
                                e.counter2,
                                e.e_gagg,
                                e.e_plastic1,
                                e.e_plastic2,
                                e.e_nai1,
                                e.e_nai2,
                                e.kin.delta_phi * rad_to_deg);
    return std::string(buf, static_cast<std::size_t>(n));
}

ListmodeWriter::ListmodeWriter(std::filesystem::path const& path)
    : path_(path), out_(path, std::ios::binary)
{
    if (!out_)
        throw IoError("cannot open listmode file '" + path.string() + "'");
    out_ << listmode_header << '\n';
}

void ListmodeWriter::write(std::span<EventRecord const> events)
{
    for (auto const& e : events)
        out_ << listmode_row(e) << '\n';
    if (!out_)
        throw IoError("failed writing '" + path_.string() + "'");
}

void ListmodeWriter::close()
{
    out_.close();
    if (out_.fail())
        throw IoError("failed closing '" + path_.string() + "'");
}

void write_listmode(std::filesystem::path const& path,
                    std::span<EventRecord const> events)
{
    ListmodeWriter w(path);
    w.write(events);
    w.close();
}

std::vector<EventRecord> read_listmode(std::istream& in)
{
    std::vector<EventRecord> events;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw IoError("listmode file is empty");
    ++lineno;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != listmode_header)
        throw IoError("listmode header mismatch: '" + line + "'");

    while (std::getline(in, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true)
        {
            auto const comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != 9)
        {
            throw IoError("listmode line " + std::to_string(lineno)
                          + ": expected 9 columns");
        }
        auto const cls = event_class_from_string(fields[0]);
        if (!cls)
        {
            throw IoError("listmode line " + std::to_string(lineno)
                          + ": unknown class '" + std::string(fields[0]) + "'");
        }
        EventRecord e;
        e.class_tag = *cls;
        e.counter1 = parse_field<int>(fields[1], lineno, "counter1");
        e.counter2 = parse_field<int>(fields[2], lineno, "counter2");
        e.e_gagg = parse_field<double>(fields[3], lineno, "e_gagg");
        e.e_plastic1 = parse_field<double>(fields[4], lineno, "e_plastic1");
        e.e_plastic2 = parse_field<double>(fields[5], lineno, "e_plastic2");
        e.e_nai1 = parse_field<double>(fields[6], lineno, "e_nai1");
        e.e_nai2 = parse_field<double>(fields[7], lineno, "e_nai2");
        e.kin.delta_phi = parse_field<double>(fields[8], lineno, "true_dphi_deg") / rad_to_deg;
        if (e.counter1 < 0 || e.counter2 < 0)
        {
            throw IoError("listmode line " + std::to_string(lineno)
                          + ": negative counter index");
        }
        events.push_back(e);
    }
    return events;
}

std::vector<EventRecord> read_listmode(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open listmode file '" + path.string() + "'");
    return read_listmode(in);
}

}  // namespace pairpol
