/// Per-subject "Average" columns of the reference duty-cycle study:
/// `[subject][frequency 7, 8, 9, 10 Hz][duty 50, 80, 85, 90, 95 %]`.
pub const REFERENCE_AVERAGES: [[[f64; 5]; 4]; 10] = [
    [
        [537.6, 538.1, 562.8, 535.1, 417.4],
        [581.5, 591.9, 651.1, 531.6, 490.2],
        [531.6, 535.9, 536.5, 490.1, 484.4],
        [503.8, 507.1, 533.2, 482.5, 487.8],
    ],
    [
        [532.1, 557.7, 561.9, 536.2, 486.2],
        [581.4, 591.3, 632.1, 538.1, 519.2],
        [525.9, 535.6, 534.0, 494.3, 489.0],
        [535.8, 531.5, 538.9, 514.0, 443.8],
    ],
    [
        [528.3, 529.2, 558.7, 509.4, 443.5],
        [537.6, 576.2, 593.7, 489.9, 489.7],
        [527.4, 531.1, 536.1, 492.2, 488.8],
        [503.4, 514.9, 535.7, 493.2, 489.6],
    ],
    [
        [535.1, 533.6, 547.8, 496.1, 484.9],
        [536.3, 534.3, 574.7, 510.1, 505.7],
        [582.1, 535.1, 537.8, 491.6, 482.4],
        [507.7, 520.1, 536.4, 492.7, 487.8],
    ],
    [
        [528.9, 535.7, 554.8, 526.7, 487.9],
        [537.9, 538.4, 591.9, 525.1, 491.6],
        [526.7, 535.5, 536.4, 494.6, 490.9],
        [510.2, 520.0, 536.2, 442.2, 443.4],
    ],
    [
        [535.7, 536.3, 559.9, 534.1, 536.2],
        [526.7, 525.6, 535.1, 501.2, 495.1],
        [505.8, 510.9, 533.1, 482.4, 465.6],
        [514.1, 520.3, 536.1, 492.1, 487.9],
    ],
    [
        [535.6, 535.8, 561.3, 534.2, 504.1],
        [509.9, 525.6, 537.1, 498.8, 489.8],
        [494.2, 537.1, 580.2, 477.7, 472.1],
        [509.1, 520.1, 535.5, 504.1, 473.4],
    ],
    [
        [535.2, 539.4, 559.2, 526.9, 495.8],
        [561.2, 592.8, 616.8, 546.3, 524.6],
        [511.8, 516.3, 532.1, 452.3, 448.3],
        [508.0, 535.5, 535.7, 492.7, 463.1],
    ],
    [
        [530.4, 538.1, 558.2, 529.8, 508.4],
        [538.3, 579.4, 611.3, 452.7, 482.5],
        [488.4, 495.1, 532.0, 410.3, 396.1],
        [501.2, 534.6, 531.2, 454.3, 447.3],
    ],
    [
        [532.4, 534.8, 559.8, 525.1, 498.2],
        [582.5, 594.8, 651.1, 528.1, 489.2],
        [486.4, 524.3, 531.1, 500.8, 439.4],
        [484.7, 490.6, 534.6, 469.5, 430.1],
    ],
];
