#pragma once

#include "rmtdetect/arraysim.hpp"
#include "rmtdetect/detect.hpp"
#include "rmtdetect/dist.hpp"
#include "rmtdetect/errors.hpp"
#include "rmtdetect/jacobi.hpp"
#include "rmtdetect/model.hpp"
#include "rmtdetect/moments.hpp"
#include "rmtdetect/random.hpp"
#include "rmtdetect/stieltjes.hpp"
#include "rmtdetect/support.hpp"
