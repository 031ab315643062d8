#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace testsupport {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

inline std::string cli_binary() {
    const char* bin = std::getenv("FACETEMB_BIN");
    if (!bin) throw std::runtime_error("FACETEMB_BIN is not set");
    return bin;
}

inline CliResult run_cli(const std::string& args) {
    std::string cmd = cli_binary() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    CliResult result;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) result.output.append(buf, n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace testsupport
