#include "stochlab/algebra.hpp"

#include "stochlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stochlab {

std::complex<double> ExactComplex::to_complex() const {
    return {boost::rational_cast<double>(re), boost::rational_cast<double>(im)};
}

std::string rational_text(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string letter_text(const Letter& l) {
    return std::string(l.kind == Letter::Kind::X ? "x" : "p") + "[" + std::to_string(l.particle) + "," +
           std::to_string(l.axis) + "]";
}

OperatorPolynomial OperatorPolynomial::constant(const ExactComplex& c, int hbar_power) {
    OperatorPolynomial p;
    p.accumulate(Key{hbar_power, {}}, c);
    return p;
}

void OperatorPolynomial::accumulate(const Key& key, const ExactComplex& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(key);
    if (it == terms_.end()) {
        terms_.emplace(key, c);
        return;
    }
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
}

void OperatorPolynomial::add(const ExactComplex& coefficient, int hbar_power, const OrderedWord& word) {
    if (coefficient.is_zero()) return;
    const OperatorPolynomial reduced = normal_order(word);
    for (const auto& [key, c] : reduced.terms_)
        accumulate(Key{key.hbar_power + hbar_power, key.word}, c * coefficient);
}

void OperatorPolynomial::add(const OperatorPolynomial& other, const ExactComplex& scale) {
    for (const auto& [key, c] : other.terms_) accumulate(key, c * scale);
}

ExactComplex OperatorPolynomial::constant_term(int hbar_power) const {
    auto it = terms_.find(Key{hbar_power, {}});
    return it == terms_.end() ? ExactComplex() : it->second;
}

OperatorPolynomial operator*(const OperatorPolynomial& a, const OperatorPolynomial& b) {
    OperatorPolynomial r;
    for (const auto& [ka, ca] : a.terms_)
        for (const auto& [kb, cb] : b.terms_) {
            OrderedWord w = ka.word;
            w.insert(w.end(), kb.word.begin(), kb.word.end());
            r.add(ca * cb, ka.hbar_power + kb.hbar_power, w);
        }
    return r;
}

// (c w)^dagger = conj(c) reverse(w), since x and p are Hermitian.
OperatorPolynomial OperatorPolynomial::adjoint() const {
    OperatorPolynomial r;
    for (const auto& [key, c] : terms_) {
        OrderedWord w(key.word.rbegin(), key.word.rend());
        r.add(c.conj(), key.hbar_power, w);
    }
    return r;
}

std::string OperatorPolynomial::to_text() const {
    if (terms_.empty()) return "0\n";
    std::ostringstream out;
    for (const auto& [key, c] : terms_) {
        out << rational_text(c.re) << ' ' << rational_text(c.im) << " h^" << key.hbar_power << " :";
        for (const auto& l : key.word) out << ' ' << letter_text(l);
        out << '\n';
    }
    return out.str();
}

namespace {

Rational parse_rational(const std::string& s, int line) {
    try {
        const auto slash = s.find('/');
        if (slash == std::string::npos) return Rational(std::stoll(s));
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw ParseError("bad rational '" + s + "'", line, 1);
    }
}

Letter parse_letter(const std::string& s, int line) {
    int particle = 0, axis = 0;
    char kind = 0;
    char close = 0;
    std::istringstream in(s);
    char open = 0, comma = 0;
    in >> kind >> open >> particle >> comma >> axis >> close;
    if (!in || (kind != 'x' && kind != 'p') || open != '[' || comma != ',' || close != ']' || particle < 0 || axis < 0)
        throw ParseError("bad letter '" + s + "'", line, 1);
    return {kind == 'x' ? Letter::Kind::X : Letter::Kind::P, particle, axis};
}

}  // namespace

OperatorPolynomial OperatorPolynomial::parse(const std::string& text) {
    OperatorPolynomial p;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (line == "0") continue;
        std::istringstream ls(line);
        std::string re, im, hp, colon;
        ls >> re >> im >> hp >> colon;
        if (!ls || hp.rfind("h^", 0) != 0 || colon != ":") throw ParseError("malformed term", lineno, 1);
        int power = 0;
        try {
            power = std::stoi(hp.substr(2));
        } catch (const std::exception&) {
            throw ParseError("bad hbar power '" + hp + "'", lineno, 1);
        }
        OrderedWord w;
        std::string tok;
        while (ls >> tok) w.push_back(parse_letter(tok, lineno));
        p.add(ExactComplex(parse_rational(re, lineno), parse_rational(im, lineno)), power, w);
    }
    return p;
}

OperatorPolynomial normal_order(const OrderedWord& word, const ReductionChooser& chooser) {
    struct Pending {
        ExactComplex c;
        int hbar_power;
        OrderedWord w;
    };
    OperatorPolynomial out;
    std::vector<Pending> stack{{ExactComplex(1), 0, word}};
    std::vector<std::size_t> inversions;
    while (!stack.empty()) {
        Pending t = std::move(stack.back());
        stack.pop_back();
        inversions.clear();
        for (std::size_t k = 0; k + 1 < t.w.size(); ++k)
            if (t.w[k].kind == Letter::Kind::P && t.w[k + 1].kind == Letter::Kind::X) inversions.push_back(k);
        if (inversions.empty()) {
            // Only commuting neighbours remain within each block.
            std::sort(t.w.begin(), t.w.end());
            out.accumulate(OperatorPolynomial::Key{t.hbar_power, std::move(t.w)}, t.c);
            continue;
        }
        const std::size_t pick = chooser ? chooser(inversions.size()) % inversions.size() : 0;
        const std::size_t k = inversions[pick];
        if (t.w[k].conjugate_to(t.w[k + 1])) {
            // p x = x p - i hbar
            OrderedWord shorter;
            shorter.reserve(t.w.size() - 2);
            for (std::size_t m = 0; m < t.w.size(); ++m)
                if (m != k && m != k + 1) shorter.push_back(t.w[m]);
            stack.push_back({t.c * ExactComplex(Rational(0), Rational(-1)), t.hbar_power + 1, std::move(shorter)});
        }
        std::swap(t.w[k], t.w[k + 1]);
        stack.push_back(std::move(t));
    }
    return out;
}

OperatorPolynomial symmetrize_word(const OrderedWord& word) {
    OrderedWord w = word;
    std::sort(w.begin(), w.end());
    OperatorPolynomial sum;
    std::int64_t count = 0;
    do {
        sum.add(normal_order(w));
        ++count;
    } while (std::next_permutation(w.begin(), w.end()));
    OperatorPolynomial r;
    r.add(sum, ExactComplex(Rational(1, count)));
    return r;
}

OperatorPolynomial symmetrize_words(const std::vector<WordTerm>& terms) {
    OperatorPolynomial r;
    for (const auto& t : terms) r.add(symmetrize_word(t.word), t.coefficient);
    return r;
}

NumericPolynomial to_numeric(const OperatorPolynomial& poly, double hbar) {
    std::map<OrderedWord, std::complex<double>> merged;
    for (const auto& [key, c] : poly.terms()) merged[key.word] += c.to_complex() * std::pow(hbar, key.hbar_power);
    NumericPolynomial out;
    for (auto& [w, c] : merged) out.push_back({c, w});
    return out;
}

}  // namespace stochlab
