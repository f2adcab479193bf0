#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace cs_spectra {

// Error taxonomy: validation_error -> CLI exit 2, numerical_error -> CLI exit 3.
// Every error carries a stable machine-readable code plus optional context
// key/values; the CLI prints them as a single JSON line on stderr.
class error : public std::runtime_error {
public:
    error(std::string code, std::string message,
          std::map<std::string, std::string> context = {})
        : std::runtime_error(message), code_(std::move(code)),
          context_(std::move(context)) {}

    const std::string& code() const noexcept { return code_; }
    const std::map<std::string, std::string>& context() const noexcept { return context_; }
    virtual int exit_code() const noexcept { return 1; }

    std::string json_line() const {
        std::string out = "{\"code\":\"";
        append_escaped(out, code_);
        out += "\",\"message\":\"";
        append_escaped(out, what());
        out += "\",\"context\":{";
        bool first = true;
        for (const auto& [k, v] : context_) {
            if (!first) out += ',';
            first = false;
            out += '"';
            append_escaped(out, k);
            out += "\":\"";
            append_escaped(out, v);
            out += '"';
        }
        out += "}}";
        return out;
    }

private:
    static void append_escaped(std::string& out, const std::string& s) {
        for (char ch : s) {
            switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    static const char* hex = "0123456789abcdef";
                    out += "\\u00";
                    out += hex[(ch >> 4) & 0xf];
                    out += hex[ch & 0xf];
                } else {
                    out += ch;
                }
            }
        }
    }

    std::string code_;
    std::map<std::string, std::string> context_;
};

class validation_error : public error {
public:
    using error::error;
    int exit_code() const noexcept override { return 2; }
};

class numerical_error : public error {
public:
    using error::error;
    int exit_code() const noexcept override { return 3; }
};

}  // namespace cs_spectra
