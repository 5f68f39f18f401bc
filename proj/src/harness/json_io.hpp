#pragma once

// Strict JSON reading: every object is wrapped in a Reader, and finish() rejects
// keys that were never asked for.

#include <cmath>
#include <optional>
#include <set>
#include <string>

#include "sel/errors.hpp"
#include "sel/harness.hpp"

namespace sel::harness {

/// Shortest form is not used: always 17 significant digits, locale-free.
std::string format_double(double v);

/// Non-finite values travel as the strings "inf", "-inf", "nan".
json number(double v);
double as_number(const json& j, const std::string& path);
int as_int(const json& j, const std::string& path);
bool as_bool(const json& j, const std::string& path);
std::string as_string(const json& j, const std::string& path);

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw InvalidInput(path_ + ": expected an object");
    }

    const json& req(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) throw InvalidInput(path_ + ": missing field '" + key + "'");
        return *it;
    }
    /// nullptr when absent or null.
    const json* opt(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return nullptr;
        return &*it;
    }
    double num(const std::string& key) { return as_number(req(key), sub(key)); }
    std::optional<double> opt_num(const std::string& key) {
        const json* v = opt(key);
        if (!v) return std::nullopt;
        return as_number(*v, sub(key));
    }
    int integer(const std::string& key) { return as_int(req(key), sub(key)); }
    bool boolean(const std::string& key) { return as_bool(req(key), sub(key)); }
    std::string str(const std::string& key) { return as_string(req(key), sub(key)); }
    std::string sub(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw InvalidInput(path_ + ": unknown field '" + k + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace sel::harness
