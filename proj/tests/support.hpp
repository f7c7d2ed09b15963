#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "megp/data_io.hpp"
#include "megp/dataset.hpp"
#include "megp/random.hpp"

namespace testing {

inline megp::Dataset make_dataset(std::size_t rows, std::size_t features, std::uint64_t seed,
    double (*f)(const double*))
{
    megp::Dataset d;
    for (std::size_t j = 0; j < features; ++j) {
        d.feature_names.push_back("x" + std::to_string(j));
    }
    d.target_name = "y";
    megp::Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<double> x(features);
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto& v : x) {
            v = u(rng);
        }
        d.add_row(x, f(x.data()));
    }
    return d;
}

// first half y = 2 x0, second half y = -2 x0 + 10, gaussian noise
inline megp::Dataset two_regime(std::size_t n, std::uint64_t seed, double noise = 0.5)
{
    megp::SynthSpec spec;
    spec.n_points = n;
    spec.n_features = 2;
    spec.regimes = {
        { "(mul 2 x0)", 0.5, noise },
        { "(add (mul -2 x0) 10)", 0.5, noise },
    };
    return megp::synth_regimes(spec, seed);
}

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path()
            / ("megp_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

} // namespace testing
