#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace aasgan {

// ---------------------------------------------------------------- errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };      // malformed input text
struct DataError : Error { using Error::Error; };       // semantically bad data
struct ArgumentError : Error { using Error::Error; };   // bad call arguments
struct ShapeError : Error { using Error::Error; };      // tensor shape mismatch
struct ContractError : Error { using Error::Error; };   // model length contract
struct IoError : Error { using Error::Error; };         // file read/write
struct FormatError : Error { using Error::Error; };     // bad container/version

// ---------------------------------------------------------------- Vec2

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

// ---------------------------------------------------------------- Rng
//
// All randomness in the project flows through this wrapper so that runs are
// reproducible from a single integer seed. The mt19937_64 engine is fully
// specified by the standard; uniform/normal draws are hand-rolled because the
// stdlib distribution algorithms are implementation-defined.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds, rejection sampling to stay unbiased
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw ArgumentError("uniform_int: lo > hi");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(eng_());  // full range
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t r;
        do { r = eng_(); } while (r >= limit);
        return lo + static_cast<std::int64_t>(r % span);
    }

    // standard normal via Box-Muller with cached spare
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double std) { return mean + std * normal(); }

    // state round-trips through text so checkpoints can resume mid-stream
    std::string state() const {
        std::ostringstream oss;
        oss << eng_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
        oss.precision(17);
        oss << spare_;
        return oss.str();
    }

    void restore(const std::string& s) {
        std::istringstream iss(s);
        int flag = 0;
        iss >> eng_ >> flag >> spare_;
        if (!iss) throw FormatError("Rng::restore: bad state string");
        has_spare_ = flag != 0;
    }

    // derives an independent stream, e.g. per (seed, scene index)
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace aasgan
