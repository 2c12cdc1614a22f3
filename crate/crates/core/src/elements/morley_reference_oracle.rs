// Generated with sympy from exact Morley basis functions on the reference triangle.
const REFERENCE_ORACLE: [[f64; 6]; 6] = [
    [2.8, -1.4, -1.4, 1.9798989873223332, 0.0, 0.0],
    [-1.4, 1.4, 0.0, -0.9899494936611666, 0.7, -0.7],
    [-1.4, 0.0, 1.4, -0.9899494936611666, -0.7, 0.7],
    [1.9798989873223332, -0.9899494936611666, -0.9899494936611666, 4.0, 1.8384776310850235, 1.8384776310850235],
    [0.0, 0.7, -0.7, 1.8384776310850235, 2.0, 0.6],
    [0.0, -0.7, 0.7, 1.8384776310850235, 0.6, 2.0],
];
