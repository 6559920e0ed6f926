// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The pqgdr Authors

#pragma once

#include <array>
#include <cstddef>

namespace pqgdr {

/// Discrete Meyer ("dmey") scaling filter, 102 taps.
///
/// Derived by frequency-sampling the Meyer conjugate mirror filter
/// H(w) = sqrt(2) * phihat(2w) on a 2^18 grid (auxiliary polynomial
/// nu(x) = x^4 (35 - 84 x + 70 x^2 - 20 x^3)), inverse transforming,
/// and truncating to the 102 central taps.  The truncated taps were then
/// projected onto the orthogonality manifold (minimal-norm Gauss-Newton
/// correction, max tap change 8.3e-5) so the conjugate-quadrature
/// conditions hold to machine precision:
///
///   sum_n h[n] h[n+2k] = delta_k   for k = 0..50   (defect < 5e-17)
///   sum_n h[n]         = sqrt(2)                   (exact)
///
/// This makes the decimated filter bank exactly orthogonal on circular
/// (periodised) signals of any even length, i.e. perfect reconstruction
/// and Parseval hold to roundoff rather than to truncation error.
inline constexpr std::size_t kDmeyTaps = 102;

inline constexpr std::array<double, kDmeyTaps> kDmeyLowpass = {
    +8.33877157318916200e-08, -4.21968529933426202e-07, +1.09833105444208992e-06,
    -1.94597536049581123e-06, +4.47906313646626467e-06, -3.27422625172073437e-06,
    +8.38583807754527427e-06, -8.39304497688230852e-07, +6.06908030866780181e-06,
    +8.69753950069705383e-08, +1.55493210705556984e-06, -2.45554409722593907e-06,
    +2.13567802324117585e-06, -5.83280920047837266e-07, +1.76028765201549054e-06,
    -5.91392733673626051e-08, -1.32351546282411296e-06, +6.78877990988607903e-07,
    +6.61100886282109432e-06, -5.53533947053119765e-06, +2.78569517572085027e-06,
    +7.60400566647563883e-07, -8.80005370035699051e-06, +1.29068256334162828e-05,
    +9.94283868659816943e-06, -3.27828327330628700e-05, +2.79585755938153431e-05,
    +2.62289996283088433e-05, -8.52538624943678419e-05, +1.43219102044776412e-05,
    +1.39297749076137956e-04, -3.91525624634269225e-05, -1.48051297604079004e-04,
    -1.44802573127721091e-04, +2.13838771999995500e-04, +8.80637038292298563e-04,
    -6.59040305529456070e-04, -2.66441663594853143e-03, +2.25593416827467438e-03,
    +5.97463121251907547e-03, -6.36671630675945868e-03, -1.10196940220461618e-02,
    +1.52059553257585037e-02, +1.74483359322777781e-02, -3.21177759541767457e-02,
    -2.43156580349561911e-02, +6.36770041835982431e-02, +3.06104616887685303e-02,
    -1.32687847922943192e-01, -3.50560941219922942e-02, +4.44101362409147549e-01,
    +7.43743950749598537e-01, +4.44101755070059556e-01, -3.50560906169441744e-02,
    -1.32686916297276886e-01, +3.06105309812959962e-02, +6.36735981358712844e-02,
    -2.43152633713541941e-02, -3.21279745137971404e-02, +1.74493606979694224e-02,
    +1.52039826097065123e-02, -1.10185243309364710e-02, -6.35970959262787197e-03,
    +5.97458190165174076e-03, +2.23372057778950875e-03, -2.66586227763956560e-03,
    -6.60983178387327449e-04, +8.79921910369389011e-04, +2.24297441801813298e-04,
    -1.43627876156448105e-04, -1.53435674643896436e-04, -3.82502762917659838e-05,
    +1.30229070023620165e-04, +1.38979109248448330e-05, -8.47538649009955155e-05,
    +2.52795064585950223e-05, +3.11048199445601643e-05, -3.19204072656669975e-05,
    +2.22045543218890515e-06, +1.35098446259564173e-05, -1.15505077121703703e-05,
    -6.22319988563353500e-07, +5.54800131657837207e-06, -3.78800633505670948e-06,
    -8.21933725204422682e-07, -3.37257870360031453e-07, -5.16932921526047342e-07,
    -4.89237685680733088e-07, -5.04733482353491015e-07, -2.72866211655681204e-08,
    -1.37713444284341052e-06, +8.44016452358496587e-07, +1.37126654370361839e-06,
    -4.39210553755945163e-06, -8.21314109893257563e-07, -5.09908090177959312e-06,
    -2.23994518799279763e-06, -1.95727820687403362e-06, -8.97217528569879654e-07,
    -1.73279305898637232e-07, +2.37960922715185326e-09, +4.70248758851816402e-10
};

/// Quadrature highpass companion, g[n] = (-1)^n h[L-1-n].
inline constexpr std::array<double, kDmeyTaps> dmey_highpass() {
    std::array<double, kDmeyTaps> g{};
    for (std::size_t n = 0; n < kDmeyTaps; ++n) {
        const double v = kDmeyLowpass[kDmeyTaps - 1 - n];
        g[n] = (n % 2 == 0) ? v : -v;
    }
    return g;
}

inline constexpr std::array<double, kDmeyTaps> kDmeyHighpass = dmey_highpass();

}  // namespace pqgdr
