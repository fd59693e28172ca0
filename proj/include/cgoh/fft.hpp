#pragma once

#include <string>
#include <vector>

#include "cgoh/common.hpp"

namespace cgoh::fft {

// Unnormalised in-place complex DFT of a row-major array (last dimension
// fastest). sign = -1 uses exp(-i...), sign = +1 uses exp(+i...).
// Plans are built once per (dims, sign) and shared between threads.
void transform(const std::vector<int>& dims, cplx* data, int sign);

// Smallest integer >= n whose only prime factors are 2, 3, 5.
int good_size(int n);

// Optional persistent plan cache (FFTW wisdom) in the given directory.
void load_wisdom(const std::string& dir);
void save_wisdom(const std::string& dir);

}  // namespace cgoh::fft
