#pragma once

#include "cs_spectra/asymptotics.hpp"
#include "cs_spectra/circle_measure.hpp"
#include "cs_spectra/closed_families.hpp"
#include "cs_spectra/errors.hpp"
#include "cs_spectra/gauss.hpp"
#include "cs_spectra/kahan.hpp"
#include "cs_spectra/numtheory.hpp"
#include "cs_spectra/parallel.hpp"
#include "cs_spectra/prequantum.hpp"
#include "cs_spectra/quadrature.hpp"
#include "cs_spectra/rational.hpp"
#include "cs_spectra/serialize.hpp"
#include "cs_spectra/svg.hpp"
#include "cs_spectra/trigpoly.hpp"

