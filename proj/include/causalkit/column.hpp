#pragma once

// Column metadata for order tables: what a column holds and which role it
// plays in an analysis (outcome / treatment / covariate / ignored).

#include <string>

#include "causalkit/common.hpp"

namespace causalkit {

enum class ColumnKind { Numeric, Categorical, Binary, Date };

enum class Role { Outcome, Treatment, Covariate, Ignored };

inline const char* to_string(ColumnKind k) {
    switch (k) {
        case ColumnKind::Numeric: return "numeric";
        case ColumnKind::Categorical: return "categorical";
        case ColumnKind::Binary: return "binary";
        case ColumnKind::Date: return "date";
    }
    return "?";
}

inline const char* to_string(Role r) {
    switch (r) {
        case Role::Outcome: return "outcome";
        case Role::Treatment: return "treatment";
        case Role::Covariate: return "covariate";
        case Role::Ignored: return "ignored";
    }
    return "?";
}

inline ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "numeric") return ColumnKind::Numeric;
    if (s == "categorical") return ColumnKind::Categorical;
    if (s == "binary") return ColumnKind::Binary;
    if (s == "date") return ColumnKind::Date;
    throw UsageError("unknown column kind: '" + s + "'");
}

inline Role role_from_string(const std::string& s) {
    if (s == "outcome") return Role::Outcome;
    if (s == "treatment") return Role::Treatment;
    if (s == "covariate") return Role::Covariate;
    if (s == "ignored") return Role::Ignored;
    throw UsageError("unknown column role: '" + s + "'");
}

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    Role role = Role::Covariate;

    bool operator==(const ColumnSpec&) const = default;
};

// Calendar date, ISO-8601 (YYYY-MM-DD).
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    bool operator==(const Date&) const = default;
    auto operator<=>(const Date&) const = default;

    int quarter() const { return (month - 1) / 3 + 1; }

    std::string to_string() const { return strfmt("%04d-%02d-%02d", year, month, day); }

    // strict ISO parse; returns false on malformed input
    static bool parse(const std::string& s, Date& out) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
        for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
            if (s[i] < '0' || s[i] > '9') return false;
        }
        const int y = std::stoi(s.substr(0, 4));
        const int m = std::stoi(s.substr(5, 2));
        const int d = std::stoi(s.substr(8, 2));
        if (m < 1 || m > 12 || d < 1 || d > 31) return false;
        out = Date{y, m, d};
        return true;
    }
};

}  // namespace causalkit
