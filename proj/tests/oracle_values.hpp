#pragma once

// Reference values frozen from 30-digit mpmath evaluations (closed forms,
// quadrature or root finding done outside this code base).
namespace oracle {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kSqrt2OverPi = 0.797884560802865355879892119869;
inline constexpr double kNormalQ975 = 1.95996398454005423552459443052;
inline constexpr double kSqrt1Over12 = 0.288675134594812882254574390251;
inline constexpr double kSqrt1Over108 = 0.0962250448649376;
inline constexpr double k48Ln2 = 33.2710646668774;

// N(0,1) restricted to (-1, 2]
inline constexpr double kGaussM0 = 0.818594614120363741384949908465;
inline constexpr double kGaussM1 = 0.187979758005955297847265992525;
inline constexpr double kGaussM2 = 0.468641956574844287685991314709;
// N(0,1) restricted to (-inf, 0.3]
inline constexpr double kGaussLowM0 = 0.617911422188952637306528963121;
inline constexpr double kGaussLowM1 = -0.381387815460524085608030509504;
inline constexpr double kGaussLowM2 = 0.503495077550795411624119810270;
// Laplace(0,1) restricted to (-1, 2]
inline constexpr double kLaplaceM0 = 0.748392637795972493255238367433;
inline constexpr double kLaplaceM1 = 0.164876516316523283754524527703;
inline constexpr double kLaplaceM2 = 0.403624980888330736541193099734;
// Exponential(rate 2, shift 0.5) restricted to (0, 1]
inline constexpr double kExpM0 = 0.632120558828557678404476229839;
inline constexpr double kExpM1 = 0.448180838242836517606714344758;
inline constexpr double kExpM2 = 0.330301397071394196011190574596;

// N(0,1) optimal grids
inline constexpr double kGaussK2Distortion = 0.363380227632418656924464946510;  // 1 - 2/pi
inline constexpr double kGaussK3Outer = 1.22400636192496152113618060213;
inline constexpr double kGaussK3Distortion = 0.19017403924790147868219084997;
inline constexpr double kGaussDistortionPm1 = 0.404230878394269288240215760262;  // grid (-1, 1)

// W2(N(0,1), Laplace(0, 1/sqrt 2)), equal variances
inline constexpr double kW2GaussLaplace = 0.193162720862486805934679967872;

// Bracketed empirical rates
inline constexpr double kEmpiricalRateD4 = 0.542401454349;    // d=4, q=8, n=1000
inline constexpr double kEmpiricalRateD5 = 0.75;              // d=5, q=10, n=32
inline constexpr double kEmpiricalRateD3 = 0.853553390593;    // d=3, q=8, n=16

}  // namespace oracle
