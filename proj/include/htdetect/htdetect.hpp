#pragma once

#include "htdetect/classifiers.hpp"
#include "htdetect/error.hpp"
#include "htdetect/features.hpp"
#include "htdetect/fft.hpp"
#include "htdetect/kde.hpp"
#include "htdetect/metrics.hpp"
#include "htdetect/pipeline.hpp"
#include "htdetect/report.hpp"
#include "htdetect/trace_io.hpp"
