#pragma once

#include <boost/rational.hpp>

#include <compare>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace stochlab {

using Rational = boost::rational<std::int64_t>;

struct ExactComplex {
    Rational re{0};
    Rational im{0};

    ExactComplex() = default;
    ExactComplex(Rational r) : re(r) {}
    ExactComplex(Rational r, Rational i) : re(r), im(i) {}
    static ExactComplex i_unit() { return {Rational(0), Rational(1)}; }

    bool is_zero() const { return re.numerator() == 0 && im.numerator() == 0; }
    ExactComplex conj() const { return {re, -im}; }
    std::complex<double> to_complex() const;

    friend ExactComplex operator+(const ExactComplex& a, const ExactComplex& b) { return {a.re + b.re, a.im + b.im}; }
    friend ExactComplex operator-(const ExactComplex& a, const ExactComplex& b) { return {a.re - b.re, a.im - b.im}; }
    friend ExactComplex operator-(const ExactComplex& a) { return {-a.re, -a.im}; }
    friend ExactComplex operator*(const ExactComplex& a, const ExactComplex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ExactComplex operator/(const ExactComplex& a, const Rational& d) { return {a.re / d, a.im / d}; }
    friend bool operator==(const ExactComplex& a, const ExactComplex& b) { return a.re == b.re && a.im == b.im; }
};

// A position or momentum operator of one particle along one axis.
struct Letter {
    enum class Kind : std::uint8_t { X = 0, P = 1 };
    Kind kind = Kind::X;
    int particle = 0;
    int axis = 0;

    friend auto operator<=>(const Letter&, const Letter&) = default;
    bool conjugate_to(const Letter& o) const { return kind != o.kind && particle == o.particle && axis == o.axis; }
};

inline Letter X(int axis, int particle = 0) { return {Letter::Kind::X, particle, axis}; }
inline Letter P(int axis, int particle = 0) { return {Letter::Kind::P, particle, axis}; }

using OrderedWord = std::vector<Letter>;

// Canonical normal order: positions left of momenta, each block sorted by
// (particle, axis). Terms are keyed by (hbar power, word).
class OperatorPolynomial {
public:
    struct Key {
        int hbar_power = 0;
        OrderedWord word;
        friend auto operator<=>(const Key&, const Key&) = default;
    };
    using TermMap = std::map<Key, ExactComplex>;

    OperatorPolynomial() = default;
    static OperatorPolynomial constant(const ExactComplex& c, int hbar_power = 0);

    // Adds coefficient * hbar^power * word after reducing the word to normal order.
    void add(const ExactComplex& coefficient, int hbar_power, const OrderedWord& word);
    void add(const OperatorPolynomial& other, const ExactComplex& scale = ExactComplex(1));

    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    // Coefficient of the identity word at the given power of hbar.
    ExactComplex constant_term(int hbar_power) const;

    OperatorPolynomial adjoint() const;
    bool is_hermitian() const { return adjoint() == *this; }

    std::string to_text() const;
    static OperatorPolynomial parse(const std::string& text);

    friend OperatorPolynomial operator+(OperatorPolynomial a, const OperatorPolynomial& b) {
        a.add(b);
        return a;
    }
    friend OperatorPolynomial operator-(OperatorPolynomial a, const OperatorPolynomial& b) {
        a.add(b, ExactComplex(-1));
        return a;
    }
    friend OperatorPolynomial operator*(const ExactComplex& s, const OperatorPolynomial& a) {
        OperatorPolynomial r;
        r.add(a, s);
        return r;
    }
    friend OperatorPolynomial operator*(const OperatorPolynomial& a, const OperatorPolynomial& b);
    friend bool operator==(const OperatorPolynomial&, const OperatorPolynomial&) = default;

private:
    friend OperatorPolynomial normal_order(const OrderedWord& word, const std::function<std::size_t(std::size_t)>& chooser);
    void accumulate(const Key& key, const ExactComplex& c);
    TermMap terms_;
};

// Picks which of `candidates` adjacent (p, x) inversions to swap next.
using ReductionChooser = std::function<std::size_t(std::size_t candidates)>;

// Reduces a word to canonical order with p_a x_a = x_a p_a - i hbar. The
// chooser defaults to the leftmost inversion; any choice gives the same result.
OperatorPolynomial normal_order(const OrderedWord& word, const ReductionChooser& chooser = {});

// Uniform average over every distinct permutation of the word's letters.
OperatorPolynomial symmetrize_word(const OrderedWord& word);

// Linear extension of symmetrize_word to formal sums of words.
struct WordTerm {
    ExactComplex coefficient{1};
    OrderedWord word;
};
OperatorPolynomial symmetrize_words(const std::vector<WordTerm>& terms);

// Numeric form with hbar substituted.
struct NumericTerm {
    std::complex<double> coefficient;
    OrderedWord word;
};
using NumericPolynomial = std::vector<NumericTerm>;
NumericPolynomial to_numeric(const OperatorPolynomial& poly, double hbar);

std::string letter_text(const Letter& l);
std::string rational_text(const Rational& r);

}  // namespace stochlab
