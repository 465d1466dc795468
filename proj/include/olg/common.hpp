// Shared enums, index helpers and error types used across the library.
#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace olg {

enum class Gender : int { male = 0, female = 1 };
enum class EmpType : int { regular = 0, contingent = 1 };

inline constexpr int n_genders = 2;
inline constexpr int n_emp_types = 2;
inline constexpr int n_household_types = n_genders * n_emp_types;

constexpr int type_index(Gender g, EmpType h) {
    return static_cast<int>(g) * n_emp_types + static_cast<int>(h);
}
constexpr Gender type_gender(int type) { return static_cast<Gender>(type / n_emp_types); }
constexpr EmpType type_emp(int type) { return static_cast<EmpType>(type % n_emp_types); }

inline const char* to_string(Gender g) { return g == Gender::male ? "male" : "female"; }
inline const char* to_string(EmpType h) { return h == EmpType::regular ? "regular" : "contingent"; }
inline std::string type_label(int type) {
    return std::string(to_string(type_gender(type))) + "-" + to_string(type_emp(type));
}

inline Gender parse_gender(const std::string& s) {
    if (s == "male" || s == "m") return Gender::male;
    if (s == "female" || s == "f") return Gender::female;
    throw std::runtime_error("unknown gender '" + s + "'");
}
inline EmpType parse_emp_type(const std::string& s) {
    if (s == "regular") return EmpType::regular;
    if (s == "contingent") return EmpType::contingent;
    throw std::runtime_error("unknown emp_type '" + s + "'");
}

// Model ages are 1-based (age 1 = calendar 20); arrays are 0-based.
struct AgeGrid {
    int entry_age = 20;   // calendar age of model age 1
    int n_ages = 101;     // calendar 20..120

    int calendar(int idx) const { return entry_age + idx; }
    int index_of_calendar(int cal) const { return cal - entry_age; }
    bool holds_calendar(int cal) const { return cal >= entry_age && cal < entry_age + n_ages; }
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FNV-1a, used for config/data fingerprints in run manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}
inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ull) {
    return fnv1a64(s.data(), s.size(), seed);
}

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace olg
