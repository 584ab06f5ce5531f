#include "teesim/crypto/cavp.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include "teesim/crypto/gcm.hpp"
#include "teesim/errors.hpp"

namespace teesim {

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2) throw std::invalid_argument("odd-length hex string");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument(std::string("bad hex digit '") + c + "'");
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::uint8_t(nib(hex[2 * i]) << 4 | nib(hex[2 * i + 1]));
    return out;
}

std::string to_hex(ByteView b) {
    static const char* d = "0123456789abcdef";
    std::string s;
    s.reserve(2 * b.size());
    for (auto c : b) s += d[c >> 4], s += d[c & 15];
    return s;
}

namespace crypto {
namespace {

std::string trim(std::string s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<GcmVector> parse_cavp(std::istream& in) {
    std::vector<GcmVector> out;
    std::map<std::string, std::string> section, rec;
    int line_no = 0, rec_line = 0;

    auto flush = [&] {
        if (rec.empty()) return;
        GcmVector v;
        v.name = "PTlen=" + section["PTlen"] + " AADlen=" + section["AADlen"] + " Count=" +
                 (rec.count("Count") ? rec["Count"] : "?") + " (line " + std::to_string(rec_line) + ")";
        try {
            for (const char* f : {"Key", "IV", "PT", "AAD", "CT", "Tag"})
                if (!rec.count(f)) throw std::invalid_argument(std::string("missing field ") + f);
            v.key = from_hex(rec["Key"]);
            v.iv = from_hex(rec["IV"]);
            v.pt = from_hex(rec["PT"]);
            v.aad = from_hex(rec["AAD"]);
            v.ct = from_hex(rec["CT"]);
            v.tag = from_hex(rec["Tag"]);
        } catch (const std::exception& e) {
            v.error = e.what();
        }
        out.push_back(std::move(v));
        rec.clear();
    };

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            flush();
            continue;
        }
        if (line[0] == '#') continue;
        if (line[0] == '[') {
            flush();
            auto eq = line.find('=');
            if (eq != std::string::npos)
                section[trim(line.substr(1, eq - 1))] = trim(line.substr(eq + 1, line.size() - eq - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k = trim(line.substr(0, eq));
        if (k == "Count") {
            flush();
            rec_line = line_no;
        }
        rec[k] = trim(line.substr(eq + 1));
    }
    flush();
    return out;
}

std::vector<GcmVector> load_cavp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw VectorFileError("cannot open vector file " + path);
    return parse_cavp(f);
}

SelfTestReport run_vectors(const std::vector<GcmVector>& vectors) {
    SelfTestReport r;
    for (const auto& v : vectors) {
        SelfTestFailure fail{v.name, to_hex(v.tag), "", ""};
        if (!v.error.empty()) {
            fail.reason = v.error;
        } else if (v.key.size() != 32 || v.iv.size() != 12 || v.tag.size() != 16) {
            fail.reason = "unsupported key/IV/tag length";
        } else {
            Gcm g(SymmetricKey::from(v.key));
            MacTag tag;
            Bytes ct = g.encrypt(v.iv, v.aad, v.pt, tag);
            fail.actual_tag = to_hex(tag);
            if (ct != v.ct)
                fail.reason = "ciphertext mismatch";
            else if (!constant_time_equal(tag, v.tag))
                fail.reason = "tag mismatch";
        }
        if (fail.reason.empty())
            r.passed.push_back(v.name);
        else
            r.failed.push_back(std::move(fail));
    }
    return r;
}

SelfTestReport crypto_self_test(const std::string& path) { return run_vectors(load_cavp(path)); }

}  // namespace crypto
}  // namespace teesim
