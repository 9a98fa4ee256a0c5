/**
 * Rubric evaluation form model: a level must be chosen for every criterion
 * before a request leaves the client; server-side 422s are mapped back onto
 * the offending criteria for inline display.
 */

import { ApiClient, ApiError, RubricDoc } from "./api.js";

export interface SubmitOutcome {
  ok: boolean;
  /** local or server validation messages per criterion id */
  criterionErrors: Record<string, string>;
  /** form-level message when nothing maps onto a criterion */
  formError?: string;
}

export class EvaluationForm {
  private readonly selections = new Map<string, number>();

  constructor(readonly rubric: RubricDoc) {}

  select(criterionId: string, level: number): void {
    const criterion = this.rubric.criteria.find(
      (c) => c.criterion_id === criterionId,
    );
    if (!criterion) {
      throw new Error(`no criterion ${criterionId} in rubric`);
    }
    if (
      !Number.isInteger(level) ||
      level < criterion.min_level ||
      level > criterion.max_level
    ) {
      throw new RangeError(
        `level ${level} outside [${criterion.min_level}, ${criterion.max_level}]`,
      );
    }
    this.selections.set(criterionId, level);
  }

  selected(criterionId: string): number | undefined {
    return this.selections.get(criterionId);
  }

  missing(): string[] {
    return this.rubric.criteria
      .map((c) => c.criterion_id)
      .filter((id) => !this.selections.has(id));
  }

  complete(): boolean {
    return this.missing().length === 0;
  }

  payload(studentId: string): {
    rubric_id: string;
    student_id: string;
    levels: Record<string, number>;
  } {
    const levels: Record<string, number> = {};
    for (const [criterionId, level] of this.selections) {
      levels[criterionId] = level;
    }
    return {
      rubric_id: this.rubric.rubric_id,
      student_id: studentId,
      levels,
    };
  }

  /**
   * Submit, or refuse locally when incomplete (no request is sent). A 422
   * from the server is attributed to the criteria named in its message.
   */
  async submit(
    api: ApiClient,
    classId: string,
    studentId: string,
  ): Promise<SubmitOutcome> {
    const missing = this.missing();
    if (missing.length > 0) {
      const criterionErrors: Record<string, string> = {};
      for (const id of missing) criterionErrors[id] = "select a level";
      return { ok: false, criterionErrors };
    }
    try {
      await api.postEvaluation(classId, this.payload(studentId));
      return { ok: true, criterionErrors: {} };
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        const criterionErrors: Record<string, string> = {};
        for (const criterion of this.rubric.criteria) {
          if (error.message.includes(criterion.criterion_id)) {
            criterionErrors[criterion.criterion_id] = error.message;
          }
        }
        if (Object.keys(criterionErrors).length > 0) {
          return { ok: false, criterionErrors };
        }
        return { ok: false, criterionErrors: {}, formError: error.message };
      }
      throw error;
    }
  }
}
