/**
 * Evaluation reporting: confusion matrix, per-class precision/recall/F1,
 * overall accuracy, and a comparison-table text layout with reserved rows
 * for reference models whose results can be appended manually.
 */
import { CLASS_NAMES } from './config';

export interface ClassMetrics {
  precision: number;
  recall: number;
  f1: number;
  support: number;
}

export interface EvalReport {
  classNames: string[];
  /** confusion[i][j] = count of class-i items predicted as class j. */
  confusion: number[][];
  perClass: ClassMetrics[];
  accuracy: number;
  total: number;
}

export function confusionMatrix(
  actual: number[],
  predicted: number[],
  numClasses: number = CLASS_NAMES.length,
): number[][] {
  if (actual.length !== predicted.length) {
    throw new Error('actual/predicted length mismatch');
  }
  const m = Array.from({ length: numClasses }, () =>
    new Array<number>(numClasses).fill(0),
  );
  for (let i = 0; i < actual.length; i++) {
    m[actual[i]][predicted[i]]++;
  }
  return m;
}

export function reportFromConfusion(
  confusion: number[][],
  classNames: string[] = [...CLASS_NAMES],
): EvalReport {
  const n = confusion.length;
  let total = 0;
  let trace = 0;
  for (let i = 0; i < n; i++) {
    trace += confusion[i][i];
    for (let j = 0; j < n; j++) total += confusion[i][j];
  }
  if (total === 0) {
    throw new Error('empty test split: confusion matrix has no counts');
  }
  const perClass: ClassMetrics[] = [];
  for (let c = 0; c < n; c++) {
    const tp = confusion[c][c];
    let fp = 0;
    let fn = 0;
    for (let i = 0; i < n; i++) {
      if (i !== c) {
        fp += confusion[i][c];
        fn += confusion[c][i];
      }
    }
    const precision = tp + fp === 0 ? 0 : tp / (tp + fp);
    const recall = tp + fn === 0 ? 0 : tp / (tp + fn);
    const f1 =
      precision + recall === 0
        ? 0
        : (2 * precision * recall) / (precision + recall);
    perClass.push({ precision, recall, f1, support: tp + fn });
  }
  return { classNames, confusion, perClass, accuracy: trace / total, total };
}

export function evalReport(
  actual: number[],
  predicted: number[],
  classNames: string[] = [...CLASS_NAMES],
): EvalReport {
  return reportFromConfusion(
    confusionMatrix(actual, predicted, classNames.length),
    classNames,
  );
}

const pct = (x: number) => `${(100 * x).toFixed(2)}%`;

/**
 * Render the report as text: per-class metric table, overall accuracy,
 * the confusion matrix, and a model-comparison table with blank rows
 * reserved for reference architectures.
 */
export function formatReport(
  report: EvalReport,
  options: { datasetName?: string } = {},
): string {
  const lines: string[] = [];
  const name = options.datasetName ?? 'test split';
  const w = Math.max(...report.classNames.map((c) => c.length), 5);
  lines.push(`Evaluation on ${name} (${report.total} images)`);
  lines.push('');
  lines.push(
    `${'Class'.padEnd(w)}  Precision  Recall     F1         Support`,
  );
  report.classNames.forEach((c, i) => {
    const m = report.perClass[i];
    lines.push(
      `${c.padEnd(w)}  ${pct(m.precision).padEnd(9)}  ` +
        `${pct(m.recall).padEnd(9)}  ${pct(m.f1).padEnd(9)}  ${m.support}`,
    );
  });
  lines.push('');
  lines.push(`Overall accuracy: ${pct(report.accuracy)}`);
  lines.push('');
  lines.push('Confusion matrix (rows = actual, columns = predicted):');
  const cw = Math.max(
    w,
    ...report.confusion.flat().map((v) => String(v).length),
  );
  lines.push(
    `${''.padEnd(w)}  ${report.classNames.map((c) => c.padStart(cw)).join(' ')}`,
  );
  report.classNames.forEach((c, i) => {
    lines.push(
      `${c.padEnd(w)}  ${report.confusion[i]
        .map((v) => String(v).padStart(cw))
        .join(' ')}`,
    );
  });
  lines.push('');
  lines.push('Model comparison (accuracy):');
  lines.push(`${'Model'.padEnd(16)}  Accuracy`);
  lines.push(`${'Custom CNN'.padEnd(16)}  ${pct(report.accuracy)}`);
  lines.push(`${'ResNet152V2'.padEnd(16)}  -`);
  lines.push(`${'EfficientNetB0'.padEnd(16)}  -`);
  lines.push('');
  lines.push(
    'Training: adam optimizer (learning rate 1e-3), categorical ' +
      'cross-entropy loss.',
  );
  return lines.join('\n');
}
