#pragma once

// log of the modified Bessel function I_nu, for the square-root-diffusion
// transition density. Ascending series for small arguments, large-argument
// asymptotic beyond; usable far past the range where I_nu itself overflows.

namespace keig {

// Requires nu > -1 and w >= 0. For nu in (-1,0) the value diverges as w -> 0;
// the series branch returns the correct (large) finite value for any w > 0.
double log_bessel_i(double nu, double w);

}  // namespace keig
