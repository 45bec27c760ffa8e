#ifndef HSFLOW_TOOLS_JSON_WRITER_HPP
#define HSFLOW_TOOLS_JSON_WRITER_HPP

// Insertion-ordered JSON emitter for the CLI reports. Every float prints as
// a 10-significant-digit scientific literal so repeated runs are
// byte-identical.

#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace hsflow::cli {

class Json {
public:
    static Json object() { return Json(Kind::Object); }
    static Json array() { return Json(Kind::Array); }
    static Json str(std::string s) {
        Json j(Kind::String);
        j.str_ = std::move(s);
        return j;
    }
    static Json num(double v) {
        Json j(Kind::Number);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.9e", v);
        j.str_ = buf;
        return j;
    }
    static Json integer(long long v) {
        Json j(Kind::Number);
        j.str_ = std::to_string(v);
        return j;
    }
    static Json boolean(bool v) {
        Json j(Kind::Bool);
        j.str_ = v ? "true" : "false";
        return j;
    }

    Json& set(const std::string& key, Json v) {
        members_.emplace_back(key, std::move(v));
        return *this;
    }
    Json& push(Json v) {
        members_.emplace_back(std::string(), std::move(v));
        return *this;
    }

    std::string dump() const {
        std::string out;
        write(out);
        return out;
    }

private:
    enum class Kind { Object, Array, String, Number, Bool };

    explicit Json(Kind k) : kind_(k) {}

    static void escape_into(std::string& out, const std::string& s) {
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\r': out += "\\r"; break;
                case '\t': out += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
    }

    void write(std::string& out) const {
        switch (kind_) {
            case Kind::Object: {
                out += '{';
                bool first = true;
                for (const auto& [k, v] : members_) {
                    if (!first) out += ',';
                    first = false;
                    out += '"';
                    escape_into(out, k);
                    out += "\":";
                    v.write(out);
                }
                out += '}';
                break;
            }
            case Kind::Array: {
                out += '[';
                bool first = true;
                for (const auto& [k, v] : members_) {
                    (void)k;
                    if (!first) out += ',';
                    first = false;
                    v.write(out);
                }
                out += ']';
                break;
            }
            case Kind::String:
                out += '"';
                escape_into(out, str_);
                out += '"';
                break;
            case Kind::Number:
            case Kind::Bool:
                out += str_;
                break;
        }
    }

    Kind kind_;
    std::string str_;
    std::vector<std::pair<std::string, Json>> members_;
};

}  // namespace hsflow::cli

#endif  // HSFLOW_TOOLS_JSON_WRITER_HPP
