import { describe, expect, it } from 'vitest';

import { CLASS_NAMES } from '../src/config';
import {
  confusionMatrix,
  evalReport,
  formatReport,
  reportFromConfusion,
} from '../src/report';

describe('confusionMatrix', () => {
  it('counts pairs into rows=actual, cols=predicted', () => {
    const m = confusionMatrix([0, 0, 1, 2], [0, 1, 1, 2], 3);
    expect(m).toEqual([
      [1, 1, 0],
      [0, 1, 0],
      [0, 0, 1],
    ]);
  });

  it('rejects mismatched lengths', () => {
    expect(() => confusionMatrix([0], [0, 1], 2)).toThrow('mismatch');
  });
});

describe('evalReport', () => {
  it('perfect predictor: accuracy 1 and all F1 = 1', () => {
    const actual = Array.from({ length: 70 }, (_, i) => i % 7);
    const report = evalReport(actual, actual);
    expect(report.accuracy).toBe(1);
    expect(report.total).toBe(70);
    for (const m of report.perClass) {
      expect(m.f1).toBe(1);
      expect(m.precision).toBe(1);
      expect(m.recall).toBe(1);
    }
  });

  it('fixed-class predictor: recall 1 for that class, precision = share', () => {
    const actual = Array.from({ length: 70 }, (_, i) => i % 7);
    const predicted = actual.map(() => 3);
    const report = evalReport(actual, predicted);
    expect(report.perClass[3].recall).toBe(1);
    expect(report.perClass[3].precision).toBeCloseTo(10 / 70, 12);
    expect(report.accuracy).toBeCloseTo(10 / 70, 12);
    for (let c = 0; c < 7; c++) {
      if (c !== 3) {
        expect(report.perClass[c].recall).toBe(0);
        expect(report.perClass[c].f1).toBe(0);
      }
    }
  });

  it('accounting identities on a synthetic confusion matrix', () => {
    // arbitrary but fixed counts, deliberately imbalanced
    const confusion = [
      [12, 1, 0, 0, 2, 0, 0],
      [0, 20, 3, 0, 0, 0, 1],
      [1, 0, 9, 0, 0, 0, 0],
      [0, 0, 0, 30, 0, 2, 0],
      [0, 0, 0, 1, 14, 0, 0],
      [2, 0, 0, 0, 0, 17, 0],
      [0, 0, 0, 0, 0, 0, 25],
    ];
    const report = reportFromConfusion(confusion);
    const total = confusion.flat().reduce((a, b) => a + b, 0);
    const trace = confusion.reduce((a, row, i) => a + row[i], 0);
    expect(report.total).toBe(total);
    expect(report.accuracy).toBe(trace / total);
    report.perClass.forEach((m, c) => {
      const rowSum = confusion[c].reduce((a, b) => a + b, 0);
      expect(m.support).toBe(rowSum);
      const colSum = confusion.reduce((a, row) => a + row[c], 0);
      expect(m.precision).toBeCloseTo(
        colSum === 0 ? 0 : confusion[c][c] / colSum,
        12,
      );
      expect(m.recall).toBeCloseTo(confusion[c][c] / rowSum, 12);
      expect(m.precision).toBeGreaterThanOrEqual(0);
      expect(m.precision).toBeLessThanOrEqual(1);
      expect(m.f1).toBeGreaterThanOrEqual(0);
      expect(m.f1).toBeLessThanOrEqual(1);
    });
  });

  it('rejects an empty test split', () => {
    const zeros = Array.from({ length: 7 }, () => new Array(7).fill(0));
    expect(() => reportFromConfusion(zeros)).toThrow('empty test split');
  });
});

describe('formatReport', () => {
  it('lists every class, overall accuracy, and reserved baseline rows', () => {
    const actual = Array.from({ length: 70 }, (_, i) => i % 7);
    const text = formatReport(evalReport(actual, actual));
    for (const name of CLASS_NAMES) {
      expect(text).toContain(name);
    }
    expect(text).toContain('Overall accuracy: 100.00%');
    expect(text).toContain('Precision');
    expect(text).toContain('Recall');
    expect(text).toContain('F1');
    expect(text).toContain('Custom CNN');
    expect(text).toContain('ResNet152V2');
    expect(text).toContain('EfficientNetB0');
    expect(text).toContain('Confusion matrix');
  });
});
