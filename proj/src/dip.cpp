#include "tneb/dip.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tneb/common.hpp"

namespace tneb {

// Port of the greatest-convex-minorant / least-concave-majorant cycling in
// Hartigan & Hartigan's AS 217. Indices are 1-based to stay close to the
// reference; the dip is tracked in units of 1/(2n) until the end.
double dip_statistic(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  if (n < 2) throw ValidationError("dip statistic needs at least two values");
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  std::copy(values.begin(), values.end(), x.begin() + 1);
  if (!std::all_of(x.begin() + 1, x.end(), [](double v) { return std::isfinite(v); }))
    throw ValidationError("dip statistic needs finite values");
  std::sort(x.begin() + 1, x.end());

  double dip = 1.0;
  if (x[static_cast<std::size_t>(n)] == x[1]) return dip / (2.0 * n);

  const auto at = [](std::vector<int>& v, int i) -> int& { return v[static_cast<std::size_t>(i)]; };
  const auto xv = [&x](int i) { return x[static_cast<std::size_t>(i)]; };
  std::vector<int> mn(static_cast<std::size_t>(n) + 1), mj(static_cast<std::size_t>(n) + 1);
  std::vector<int> gcm(static_cast<std::size_t>(n) + 2), lcm(static_cast<std::size_t>(n) + 2);

  // Indices over which the convex minorant must combine.
  at(mn, 1) = 1;
  for (int j = 2; j <= n; ++j) {
    at(mn, j) = j - 1;
    for (;;) {
      const int mnj = at(mn, j);
      const int mnmnj = at(mn, mnj);
      if (mnj == 1 || (xv(j) - xv(mnj)) * (mnj - mnmnj) < (xv(mnj) - xv(mnmnj)) * (j - mnj)) break;
      at(mn, j) = mnmnj;
    }
  }
  // And for the concave majorant.
  at(mj, n) = n;
  for (int k = n - 1; k >= 1; --k) {
    at(mj, k) = k + 1;
    for (;;) {
      const int mjk = at(mj, k);
      const int mjmjk = at(mj, mjk);
      if (mjk == n || (xv(k) - xv(mjk)) * (mjk - mjmjk) < (xv(mjk) - xv(mjmjk)) * (k - mjk)) break;
      at(mj, k) = mjmjk;
    }
  }

  int low = 1;
  int high = n;
  for (;;) {
    int i = 1;
    at(gcm, 1) = high;
    while (at(gcm, i) > low) {
      at(gcm, i + 1) = at(mn, at(gcm, i));
      ++i;
    }
    const int l_gcm = i;
    int ig = l_gcm;
    int ix = ig - 1;

    i = 1;
    at(lcm, 1) = low;
    while (at(lcm, i) < high) {
      at(lcm, i + 1) = at(mj, at(lcm, i));
      ++i;
    }
    const int l_lcm = i;
    int ih = l_lcm;
    int iv = 2;

    // Largest distance between the minorant and the majorant on [low, high].
    double d = 0.0;
    if (l_gcm != 2 || l_lcm != 2) {
      do {
        const int gcmix = at(gcm, ix);
        const int lcmiv = at(lcm, iv);
        if (gcmix > lcmiv) {
          const int gcmi1 = at(gcm, ix + 1);
          const double dx = (lcmiv - gcmi1 + 1) -
                            (static_cast<long double>(xv(lcmiv)) - xv(gcmi1)) * (gcmix - gcmi1) / (xv(gcmix) - xv(gcmi1));
          ++iv;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv - 1;
          }
        } else {
          const int lcmiv1 = at(lcm, iv - 1);
          const double dx = (static_cast<long double>(xv(gcmix)) - xv(lcmiv1)) * (lcmiv - lcmiv1) /
                                (xv(lcmiv) - xv(lcmiv1)) -
                            (gcmix - lcmiv1 - 1);
          --ix;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv;
          }
        }
        ix = std::max(ix, 1);
        iv = std::min(iv, l_lcm);
      } while (at(gcm, ix) != at(lcm, iv));
    } else {
      d = 1.0;
    }
    if (d < dip) break;

    // Dips of the minorant and the majorant for the current interval.
    double dip_l = 0.0;
    for (int j = ig; j < l_gcm; ++j) {
      double max_t = 1.0;
      const int jb = at(gcm, j + 1);
      const int je = at(gcm, j);
      if (je - jb > 1 && xv(je) != xv(jb)) {
        const double c = (je - jb) / (xv(je) - xv(jb));
        for (int jj = jb; jj <= je; ++jj) max_t = std::max(max_t, (jj - jb + 1) - (xv(jj) - xv(jb)) * c);
      }
      dip_l = std::max(dip_l, max_t);
    }
    double dip_u = 0.0;
    for (int j = ih; j < l_lcm; ++j) {
      double max_t = 1.0;
      const int jb = at(lcm, j);
      const int je = at(lcm, j + 1);
      if (je - jb > 1 && xv(je) != xv(jb)) {
        const double c = (je - jb) / (xv(je) - xv(jb));
        for (int jj = jb; jj <= je; ++jj) max_t = std::max(max_t, (xv(jj) - xv(jb)) * c - (jj - jb - 1));
      }
      dip_u = std::max(dip_u, max_t);
    }
    dip = std::max({dip, dip_l, dip_u});

    // Without this check the cycle can repeat forever.
    if (low == at(gcm, ig) && high == at(lcm, ih)) break;
    low = at(gcm, ig);
    high = at(lcm, ih);
  }
  return dip / (2.0 * n);
}

}  // namespace tneb
