#pragma once

namespace exphedge {

// Standard normal density.
double norm_pdf(double x);

// Standard normal CDF, accurate to ~1e-15 via erfc.
double norm_cdf(double x);

// Inverse standard normal CDF (Wichura's PPND16 rational approximation,
// relative error below 1e-15 on (0,1)). Throws InvalidParams outside (0,1).
double norm_inv(double p);

}  // namespace exphedge
