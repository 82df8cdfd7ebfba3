#include "perideval/problems.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace perideval {

bool delay_commensurate(double tau, double dt) {
    if (tau <= 0.0 || dt <= 0.0) return false;
    const double ratio = tau / dt;
    const double rounded = std::round(ratio);
    return rounded >= 1.0 && std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio);
}

int delay_steps(double tau, double dt) {
    if (!delay_commensurate(tau, dt))
        throw ConfigError("tau = " + std::to_string(tau) +
                          " is not an integer multiple of the step " + std::to_string(dt));
    return static_cast<int>(std::lround(tau / dt));
}

Generator discretize_laplacian_1d(const EllipticSpec1D& spec) {
    const int n = spec.interior_points;
    if (n < 1) throw ValidationError("elliptic.n must be >= 1");
    if (spec.length <= 0.0) throw ValidationError("elliptic.L must be positive");
    if (spec.diffusion <= 0.0) throw ValidationError("elliptic.diffusion must be positive");
    Vector a0 = spec.potential_a0;
    if (a0.size() == 0) a0 = Vector::Zero(n);
    if (a0.size() != n) throw StructuralError("potential_a0 must have n entries");
    if (a0.minCoeff() < 0.0) throw ValidationError("potential a0 must be nonnegative");
    if (spec.boundary == BoundaryKind::robin) {
        if (spec.robin_b0 < 0.0) throw ValidationError("robin b0 must be nonnegative");
        if (spec.robin_b0 == 0.0 && a0.maxCoeff() == 0.0)
            throw ValidationError(
                "robin boundary with b0 = 0 and a0 = 0 is degenerate (lambda1 = 0); "
                "require a0 != 0 or b0 != 0");
    }

    const double h = spec.length / (n + 1);
    const double w = spec.diffusion / (h * h);
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = 2.0 * w + a0[i];
        if (i > 0) a(i, i - 1) = -w;
        if (i + 1 < n) a(i, i + 1) = -w;
    }
    if (spec.boundary == BoundaryKind::robin) {
        // eliminate the boundary value through b0 u_0 - (u_1 - u_0)/h = 0,
        // i.e. u_0 = u_1 / (1 + b0 h); only the diagonal changes
        const double ghost = 1.0 / (1.0 + spec.robin_b0 * h);
        a(0, 0) = (2.0 - ghost) * w + a0[0];
        a(n - 1, n - 1) = (2.0 - ghost) * w + a0[n - 1];
    }
    return build_generator(a);
}

Vector first_eigenfunction(const Generator& gen) {
    if (!gen.self_adjoint())
        throw ValidationError("first_eigenfunction requires a self-adjoint generator");
    Vector v = gen.symmetric_eigen()->vectors.col(0);
    if (v.sum() < 0.0) v = -v;
    v = v.cwiseMax(0.0);
    const double peak = v.maxCoeff();
    if (peak <= 0.0) throw NumericalError("first eigenfunction is not sign-definite");
    return v / peak;
}

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
    bool consumed = false;
};

class ConfigReader {
public:
    explicit ConfigReader(const std::string& text) {
        std::istringstream stream(text);
        std::string line;
        int line_no = 0;
        while (std::getline(stream, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("expected 'key = value'", line_no,
                                  static_cast<int>(line.size()));
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("empty key", line_no, 1);
            if (value.empty())
                throw ConfigError("empty value for key '" + key + "'", line_no,
                                  static_cast<int>(eq) + 2);
            if (entries_.count(key))
                throw ConfigError("duplicate key '" + key + "'", line_no, 1);
            entries_[key] = RawEntry{value, line_no, false};
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string text(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'");
        it->second.consumed = true;
        return it->second.value;
    }

    double real(const std::string& key) {
        const std::string raw = text(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' has a malformed real value '" + raw + "'",
                              entries_[key].line);
        }
    }

    long integer(const std::string& key) {
        const std::string raw = text(key);
        try {
            std::size_t used = 0;
            const long v = std::stol(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' has a malformed integer value '" + raw + "'",
                              entries_[key].line);
        }
    }

    bool boolean(const std::string& key) {
        const std::string raw = text(key);
        if (raw == "true") return true;
        if (raw == "false") return false;
        throw ConfigError("key '" + key + "' must be 'true' or 'false', got '" + raw + "'",
                          entries_[key].line);
    }

    void reject_unconsumed() const {
        for (const auto& [key, entry] : entries_)
            if (!entry.consumed) throw ConfigError("unknown key '" + key + "'", entry.line);
    }

private:
    static std::string trim(std::string s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos) return "";
        const auto last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    }

    std::map<std::string, RawEntry> entries_;
};

Matrix parse_matrix(const std::string& raw) {
    std::vector<std::vector<double>> rows;
    std::istringstream row_stream(raw);
    std::string row_text;
    while (std::getline(row_stream, row_text, ';')) {
        std::vector<double> row;
        std::istringstream entry_stream(row_text);
        std::string entry;
        while (std::getline(entry_stream, entry, ',')) {
            try {
                std::size_t used = 0;
                const std::string token = entry;
                const double v = std::stod(token, &used);
                while (used < token.size() && (token[used] == ' ' || token[used] == '\t')) ++used;
                if (used != token.size()) throw std::invalid_argument(token);
                row.push_back(v);
            } catch (const std::exception&) {
                throw ConfigError("generator.matrix entry '" + entry + "' is not a real number");
            }
        }
        if (row.empty()) throw ConfigError("generator.matrix has an empty row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("generator.matrix is empty");
    const std::size_t n = rows.size();
    for (const auto& row : rows)
        if (row.size() != n)
            throw ConfigError("generator.matrix must be square; row length " +
                              std::to_string(row.size()) + " != " + std::to_string(n));
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return a;
}

} // namespace

ProblemSpec load_problem(const std::string& text) {
    ConfigReader reader(text);
    ProblemSpec spec;
    spec.label = reader.text("label");

    spec.omega = reader.real("omega");
    if (spec.omega <= 0.0) throw ConfigError("omega must be positive");
    const long steps = reader.integer("steps_M");
    if (steps < 8) throw ConfigError("steps_M must be >= 8, got " + std::to_string(steps));
    spec.steps_M = static_cast<int>(steps);
    spec.tau = reader.real("tau");
    if (spec.tau <= 0.0) throw ConfigError("tau must be positive");

    const std::string kind = reader.text("nonlinearity.kind");
    if (kind == "affine")
        spec.kind = NonlinearityKind::affine;
    else if (kind == "saturating")
        spec.kind = NonlinearityKind::saturating;
    else
        throw ConfigError("nonlinearity.kind must be 'affine' or 'saturating', got '" + kind + "'");

    spec.c1 = reader.real("nonlinearity.C1");
    if (spec.c1 < 0.0) throw ConfigError("nonlinearity.C1 must be nonnegative");
    spec.c2 = reader.real("nonlinearity.C2");
    if (spec.c2 < 0.0) throw ConfigError("nonlinearity.C2 must be nonnegative");

    spec.forcing_a = reader.real("forcing.a");
    spec.forcing_b = reader.real("forcing.b");
    spec.forcing_phase = reader.real("forcing.phase");
    if (spec.forcing_a < std::abs(spec.forcing_b))
        throw ConfigError("forcing requires a >= |b| >= 0 (a = " + std::to_string(spec.forcing_a) +
                          ", b = " + std::to_string(spec.forcing_b) + ")");

    const bool has_matrix = reader.has("generator.matrix");
    const bool has_elliptic = reader.has("elliptic.n") || reader.has("elliptic.L") ||
                              reader.has("elliptic.diffusion") || reader.has("elliptic.a0") ||
                              reader.has("elliptic.boundary");
    if (has_matrix && has_elliptic)
        throw ConfigError("provide either generator.matrix or the elliptic.* group, not both");
    if (has_matrix) {
        spec.generator_source = parse_matrix(reader.text("generator.matrix"));
    } else if (has_elliptic) {
        EllipticSpec1D elliptic;
        elliptic.interior_points = static_cast<int>(reader.integer("elliptic.n"));
        if (elliptic.interior_points < 1) throw ConfigError("elliptic.n must be >= 1");
        elliptic.length = reader.real("elliptic.L");
        if (elliptic.length <= 0.0) throw ConfigError("elliptic.L must be positive");
        elliptic.diffusion = reader.real("elliptic.diffusion");
        if (elliptic.diffusion <= 0.0) throw ConfigError("elliptic.diffusion must be positive");
        const double a0 = reader.real("elliptic.a0");
        if (a0 < 0.0) throw ConfigError("elliptic.a0 must be nonnegative");
        elliptic.potential_a0 = Vector::Constant(elliptic.interior_points, a0);
        const std::string boundary = reader.text("elliptic.boundary");
        if (boundary == "dirichlet") {
            elliptic.boundary = BoundaryKind::dirichlet;
        } else if (boundary.rfind("robin:", 0) == 0) {
            elliptic.boundary = BoundaryKind::robin;
            try {
                std::size_t used = 0;
                const std::string tail = boundary.substr(6);
                elliptic.robin_b0 = std::stod(tail, &used);
                if (used != tail.size()) throw std::invalid_argument(tail);
            } catch (const std::exception&) {
                throw ConfigError("elliptic.boundary robin value is malformed: '" + boundary + "'");
            }
            if (elliptic.robin_b0 < 0.0) throw ConfigError("robin b0 must be nonnegative");
            if (elliptic.robin_b0 == 0.0 && a0 == 0.0)
                throw ConfigError("elliptic.boundary robin:0 with a0 = 0 is degenerate; "
                                  "require a0 != 0 or b0 != 0");
        } else {
            throw ConfigError("elliptic.boundary must be 'dirichlet' or 'robin:<b0>', got '" +
                              boundary + "'");
        }
        spec.generator_source = elliptic;
    } else {
        throw ConfigError("missing generator: provide generator.matrix or the elliptic.* group");
    }

    if (reader.has("interpolate_delay")) spec.interpolate_delay = reader.boolean("interpolate_delay");
    if (reader.has("seed")) {
        const long seed = reader.integer("seed");
        if (seed < 0) throw ConfigError("seed must be nonnegative");
        spec.seed = static_cast<std::uint64_t>(seed);
    }

    reader.reject_unconsumed();

    const double dt = spec.omega / spec.steps_M;
    if (!spec.interpolate_delay && !delay_commensurate(spec.tau, dt))
        throw ConfigError("tau = " + std::to_string(spec.tau) +
                          " is not commensurate with omega/steps_M = " + std::to_string(spec.omega) +
                          "/" + std::to_string(spec.steps_M) + " = " + std::to_string(dt) +
                          " and interpolate_delay is false");
    return spec;
}

ProblemSpec load_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_problem(buffer.str());
}

Problem assemble(const ProblemSpec& spec) {
    Generator gen = std::holds_alternative<Matrix>(spec.generator_source)
                        ? build_generator(std::get<Matrix>(spec.generator_source))
                        : discretize_laplacian_1d(std::get<EllipticSpec1D>(spec.generator_source));

    ForcingProfile forcing;
    forcing.a = spec.forcing_a;
    forcing.b = spec.forcing_b;
    forcing.phase = spec.forcing_phase;
    forcing.omega = spec.omega;
    forcing.shape = std::holds_alternative<EllipticSpec1D>(spec.generator_source)
                        ? first_eigenfunction(gen)
                        : Vector::Ones(gen.dimension());

    NonlinearitySpec f = spec.kind == NonlinearityKind::affine
                             ? make_affine(spec.c1, spec.c2, spec.tau, forcing)
                             : make_saturating(spec.c1, spec.c2, spec.tau, forcing);
    return Problem{spec, std::move(gen), std::move(f)};
}

} // namespace perideval
