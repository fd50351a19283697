#pragma once

#include "decoherence.hpp"
#include "errors.hpp"
#include "export.hpp"
#include "hormander.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "model_io.hpp"
#include "propagation.hpp"
#include "wigner.hpp"
