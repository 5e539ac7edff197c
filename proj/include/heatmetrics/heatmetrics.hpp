#pragma once

#include "heatmetrics/classifier.hpp"
#include "heatmetrics/error.hpp"
#include "heatmetrics/explainers.hpp"
#include "heatmetrics/filters.hpp"
#include "heatmetrics/fixtures.hpp"
#include "heatmetrics/io.hpp"
#include "heatmetrics/manifest.hpp"
#include "heatmetrics/manipulation.hpp"
#include "heatmetrics/npy.hpp"
#include "heatmetrics/postviz.hpp"
#include "heatmetrics/quality.hpp"
#include "heatmetrics/render.hpp"
#include "heatmetrics/report.hpp"
#include "heatmetrics/tensor.hpp"
