#include "hbpolyak/quadratic_problem.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

namespace hbpolyak {

SpectrumSpec SpectrumSpec::geometric(Index dim, double mu, double L,
                                     std::uint64_t seed) {
  return SpectrumSpec{SpectrumKind::geometric, dim, mu, L, {}, seed};
}

SpectrumSpec SpectrumSpec::uniform(Index dim, double mu, double L,
                                   std::uint64_t seed) {
  return SpectrumSpec{SpectrumKind::uniform, dim, mu, L, {}, seed};
}

SpectrumSpec SpectrumSpec::explicit_list(std::vector<double> values,
                                         std::uint64_t seed) {
  const auto dim = static_cast<Index>(values.size());
  return SpectrumSpec{SpectrumKind::explicit_list, dim, 0.0, 0.0,
                      std::move(values), seed};
}

void SpectrumSpec::validate() const {
  if (kind == SpectrumKind::explicit_list) {
    if (values.empty()) throw ValidationError("explicit spectrum is empty");
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("explicit spectrum contains a negative or "
                              "non-finite eigenvalue");
    }
    return;
  }
  if (dim < 1) throw ValidationError("dimension must be >= 1");
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw ValidationError("mu must be positive");
  if (!(L >= mu) || !std::isfinite(L))
    throw ValidationError("L must be finite and >= mu");
}

std::vector<double> SpectrumSpec::eigenvalues() const {
  validate();
  if (kind == SpectrumKind::explicit_list) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    return sorted;
  }
  std::vector<double> out(static_cast<std::size_t>(dim));
  if (dim == 1) {
    out[0] = mu;
    return out;
  }
  const double last = static_cast<double>(dim - 1);
  for (Index i = 0; i < dim; ++i) {
    const double s = static_cast<double>(i) / last;
    out[static_cast<std::size_t>(i)] =
        kind == SpectrumKind::geometric ? mu * std::pow(L / mu, s)
                                        : mu + (L - mu) * s;
  }
  out.front() = mu;
  out.back() = L;
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<double> parse_spectrum(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    double value = 0.0;
    const auto [end, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size())
      throw ValidationError("spectrum line " + std::to_string(line_no) +
                            ": not a decimal number: '" + std::string(text) +
                            "'");
    if (!std::isfinite(value) || value < 0.0)
      throw ValidationError("spectrum line " + std::to_string(line_no) +
                            ": eigenvalues must be nonnegative");
    values.push_back(value);
  }
  if (values.empty()) throw ValidationError("spectrum file has no eigenvalues");
  return values;
}

std::vector<double> read_spectrum_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open spectrum file " + path.string());
  return parse_spectrum(in);
}

}  // namespace hbpolyak
