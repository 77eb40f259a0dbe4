#include "demoscope/kv_file.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "demoscope/error.hpp"
#include "demoscope/text.hpp"

namespace demoscope {

namespace {

class Parser {
public:
    Parser(std::string_view src, std::string_view origin) : src_(src), origin_(origin) {}

    std::map<std::string, KvFile::Value> run() {
        std::map<std::string, KvFile::Value> out;
        std::string section;
        while (!at_end()) {
            skip_blank();
            if (at_end()) break;
            const char c = peek();
            if (c == '\n') {
                advance();
                continue;
            }
            if (c == '#') {
                skip_line();
                continue;
            }
            if (c == '[') {
                advance();
                section = read_key();
                skip_blank();
                expect(']');
                finish_line();
                continue;
            }
            std::string key = read_key();
            if (key.empty()) fail("expected a key");
            if (!section.empty()) key = section + "." + key;
            skip_blank();
            expect('=');
            skip_blank();
            KvFile::Value value = read_value();
            finish_line();
            if (!out.emplace(key, std::move(value)).second) fail("duplicate key '" + key + "'");
        }
        return out;
    }

private:
    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return src_[pos_]; }
    void advance() {
        if (src_[pos_] == '\n') ++line_;
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::ConfigInvalid, std::string(origin_) + ":" + std::to_string(line_) + ": " + msg);
    }

    void skip_blank() {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
    }
    void skip_line() {
        while (!at_end() && peek() != '\n') advance();
    }
    void expect(char c) {
        if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
        advance();
    }
    void finish_line() {
        skip_blank();
        if (at_end()) return;
        if (peek() == '#') {
            skip_line();
            return;
        }
        if (peek() != '\n') fail("unexpected trailing characters");
        advance();
    }

    std::string read_key() {
        std::string key;
        while (!at_end()) {
            const char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
                key.push_back(c);
                advance();
            } else {
                break;
            }
        }
        return key;
    }

    char read_escape() {
        if (at_end()) fail("unterminated escape");
        const char c = peek();
        advance();
        switch (c) {
            case 'n': return '\n';
            case 't': return '\t';
            case 'r': return '\r';
            case '"': return '"';
            case '\\': return '\\';
            default: fail(std::string("unknown escape \\") + c);
        }
    }

    KvFile::Value read_value() {
        if (at_end()) fail("missing value");
        if (src_.substr(pos_).starts_with("\"\"\"")) return read_multiline();
        if (peek() == '"') return read_basic();
        if (peek() == '\'') return read_literal();
        std::string token;
        while (!at_end() && peek() != '\n' && peek() != '#') {
            token.push_back(peek());
            advance();
        }
        const std::string_view t = text::trim(token);
        if (t == "true") return true;
        if (t == "false") return false;
        long long iv = 0;
        auto [ip, iec] = std::from_chars(t.data(), t.data() + t.size(), iv);
        if (iec == std::errc() && ip == t.data() + t.size()) return iv;
        double dv = 0;
        auto [dp, dec] = std::from_chars(t.data(), t.data() + t.size(), dv);
        if (dec == std::errc() && dp == t.data() + t.size()) return dv;
        fail("cannot parse value '" + std::string(t) + "'");
    }

    std::string read_basic() {
        advance();
        std::string out;
        while (true) {
            if (at_end() || peek() == '\n') fail("unterminated string");
            const char c = peek();
            advance();
            if (c == '"') return out;
            out.push_back(c == '\\' ? read_escape() : c);
        }
    }

    std::string read_literal() {
        advance();
        std::string out;
        while (true) {
            if (at_end() || peek() == '\n') fail("unterminated string");
            const char c = peek();
            advance();
            if (c == '\'') return out;
            out.push_back(c);
        }
    }

    std::string read_multiline() {
        pos_ += 3;
        if (!at_end() && peek() == '\r') advance();
        if (!at_end() && peek() == '\n') advance();
        std::string out;
        while (true) {
            if (at_end()) fail("unterminated multiline string");
            if (src_.substr(pos_).starts_with("\"\"\"")) {
                pos_ += 3;
                return out;
            }
            const char c = peek();
            advance();
            if (c == '\r') continue;
            out.push_back(c == '\\' ? read_escape() : c);
        }
    }

    std::string_view src_;
    std::string_view origin_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace

KvFile KvFile::parse(std::string_view source, std::string_view origin) {
    KvFile file;
    file.origin_ = std::string(origin);
    file.values_ = Parser(source, origin).run();
    return file;
}

KvFile KvFile::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open " + path.string());
    std::string src((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(src, path.string());
}

std::optional<std::string> KvFile::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto* s = std::get_if<std::string>(&it->second)) return *s;
    throw Error(ErrorCode::ConfigInvalid, origin_ + ": key '" + key + "' must be a string");
}

std::optional<long long> KvFile::get_int(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto* v = std::get_if<long long>(&it->second)) return *v;
    throw Error(ErrorCode::ConfigInvalid, origin_ + ": key '" + key + "' must be an integer");
}

std::optional<double> KvFile::get_number(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto* v = std::get_if<double>(&it->second)) return *v;
    if (auto* v = std::get_if<long long>(&it->second)) return static_cast<double>(*v);
    throw Error(ErrorCode::ConfigInvalid, origin_ + ": key '" + key + "' must be a number");
}

std::optional<bool> KvFile::get_bool(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto* v = std::get_if<bool>(&it->second)) return *v;
    throw Error(ErrorCode::ConfigInvalid, origin_ + ": key '" + key + "' must be true or false");
}

std::string KvFile::canonical() const {
    std::ostringstream out;
    for (const auto& [key, value] : values_) {
        out << key << '=';
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::string>) {
                    out << 's' << v.size() << ':' << v;
                } else if constexpr (std::is_same_v<T, bool>) {
                    out << (v ? "true" : "false");
                } else {
                    out << v;
                }
            },
            value);
        out << '\n';
    }
    return out.str();
}

}  // namespace demoscope
