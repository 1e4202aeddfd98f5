#pragma once

#include <array>
#include <optional>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <sys/wait.h>

namespace testutil {

struct ProcessResult
{
    int exit_code{-1};
    std::string out;  //!< stdout and stderr, interleaved
};

inline ProcessResult run_process(std::string const& command)
{
    ProcessResult r;
    FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
    if (!pipe)
        throw std::runtime_error("cannot start: " + command);
    std::array<char, 4096> buf{};
    while (auto n = std::fread(buf.data(), 1, buf.size(), pipe))
        r.out.append(buf.data(), n);
    int const status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// Value of a "key = value" line in command output
inline std::optional<double> output_value(std::string const& out, std::string const& key)
{
    std::string const needle = key + " = ";
    std::size_t pos = 0;
    while ((pos = out.find(needle, pos)) != std::string::npos)
    {
        if (pos == 0 || out[pos - 1] == '\n')
            return std::stod(out.substr(pos + needle.size()));
        pos += needle.size();
    }
    return std::nullopt;
}

}  // namespace testutil
