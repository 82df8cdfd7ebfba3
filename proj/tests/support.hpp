#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "perideval/nonlinearity.hpp"

namespace test_support {

inline std::string config_dir() {
#ifdef PERIDEVAL_CONFIG_DIR
    return PERIDEVAL_CONFIG_DIR;
#else
    return "configs";
#endif
}

inline std::string config_path(const std::string& name) {
    return (std::filesystem::path(config_dir()) / name).string();
}

struct RunResult {
    int exit_code = -1;
    std::string output;

    bool contains(const std::string& needle) const {
        return output.find(needle) != std::string::npos;
    }
};

/// Runs a shell command, merging stderr into stdout.
inline RunResult run_command(const std::string& command) {
    RunResult result;
    FILE* pipe = popen((command + " 2>&1").c_str(), "r");
    if (!pipe) return result;
    char buffer[4096];
    std::size_t got = 0;
    while ((got = std::fread(buffer, 1, sizeof(buffer), pipe)) > 0) result.output.append(buffer, got);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline perideval::ForcingProfile forcing(double a, double b, double phase, double omega, int n) {
    perideval::ForcingProfile f;
    f.a = a;
    f.b = b;
    f.phase = phase;
    f.omega = omega;
    f.shape = perideval::Vector::Ones(n);
    return f;
}

inline perideval::Matrix scalar_matrix(double value) {
    perideval::Matrix m(1, 1);
    m << value;
    return m;
}

} // namespace test_support
