/**
 * Typed client for the gradelens JSON API (/api/v1). The UI consumes the
 * server's numbers as-is; the only client-side arithmetic anywhere is the
 * pie model's percent computation.
 */

export interface TokenGrant {
  token: string;
  expires_at: string;
  user_id: string;
  role: "department_head" | "instructor" | "student";
}

export interface OutcomeDoc {
  outcome_code: string;
  graduate_attribute: string;
  curriculum_version: string;
  active: boolean;
}

export interface CourseDoc {
  course_code: string;
  title: string;
  units: number;
  active: boolean;
}

export interface ClassDoc {
  class_id: string;
  course_code: string;
  term: string;
  instructor_id: string;
  roster: string[];
}

export interface MappingDoc {
  outcome_code: string;
  map_weight: number;
}

export interface CriterionDoc {
  criterion_id: string;
  description: string;
  weight: number;
  mappings: MappingDoc[];
  min_level: number;
  max_level: number;
  level_descriptors: string[];
}

export interface RubricDoc {
  rubric_id: string;
  title: string;
  criteria: CriterionDoc[];
}

export interface SkillDoc {
  skill_id: string;
  name: string;
  course_code: string;
}

export interface SkillViewDoc {
  skill_id: string;
  name: string;
  course_code: string;
  class_id: string;
  score: number;
  recorded_at: string;
}

export interface BandCountDoc {
  label: string;
  count: number;
}

export interface DistributionDoc {
  scope: string;
  outcome_code: string;
  theta: number;
  bands: BandCountDoc[];
  total: number;
  no_evidence_count: number;
}

export interface AttainmentRecordDoc {
  student_id: string;
  outcome_code: string;
  scope: string;
  score: number;
  attained: boolean;
  evidence_count: number;
  band?: string;
}

export interface StudentAttainmentDoc {
  student_id: string;
  theta: number;
  records: AttainmentRecordDoc[];
}

export interface TrendPointDoc {
  term: string;
  no_evidence: boolean;
  rate: number | null;
  attained_count: number;
  record_count: number;
}

export interface TrendDoc {
  outcome_code: string;
  curriculum_version: string;
  theta: number;
  series: TrendPointDoc[];
}

export interface RollupOutcomeDoc {
  outcome_code: string;
  graduate_attribute: string;
  active: boolean;
  no_evidence: boolean;
  rate: number | null;
  attained_count: number;
  record_count: number;
  distribution: DistributionDoc | null;
}

export interface RollupDoc {
  curriculum_version: string;
  terms: string[];
  theta: number;
  outcomes: RollupOutcomeDoc[];
}

export interface ScoreCellDoc {
  student_id: string;
  item_id: string;
  raw_score: number;
  recorded_at: string;
}

export interface GradebookDoc {
  class_id: string;
  course_code: string;
  term: string;
  weights_normalized: boolean;
  components: { component_id: string; name: string; weight: number }[];
  items: { item_id: string; component_id: string; title: string; max_points: number }[];
  scores: ScoreCellDoc[];
  graded: { student_id: string; final_percent: number; grade: string }[];
  incomplete: { student_id: string; missing: string[] }[];
  mean_percent?: number | null;
  roster?: string[];
}

export interface ApiErrorDoc {
  code: string;
  message: string;
  details?: Record<string, unknown>;
}

/** Thrown for every non-2xx response; carries the server's machine code. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details?: Record<string, unknown>;

  constructor(status: number, doc: ApiErrorDoc) {
    super(doc.message);
    this.status = status;
    this.code = doc.code;
    this.details = doc.details;
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private token: string | null = null,
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    rawBody?: string,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    let payload: string | undefined;
    if (rawBody !== undefined) {
      headers["content-type"] = "text/csv";
      payload = rawBody;
    } else if (body !== undefined) {
      headers["content-type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const response = await fetch(`${this.baseUrl}/api/v1${path}`, {
      method,
      headers,
      body: payload,
    });
    const text = await response.text();
    if (!response.ok) {
      let doc: ApiErrorDoc;
      try {
        doc = JSON.parse(text) as ApiErrorDoc;
      } catch {
        doc = { code: "http_error", message: text || response.statusText };
      }
      throw new ApiError(response.status, doc);
    }
    return JSON.parse(text) as T;
  }

  get<T>(path: string): Promise<T> {
    return this.request<T>("GET", path);
  }

  post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>("POST", path, body);
  }

  put<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>("PUT", path, body);
  }

  postCsv<T>(path: string, csv: string): Promise<T> {
    return this.request<T>("POST", path, undefined, csv);
  }

  // --- typed wrappers -------------------------------------------------------

  login(nameOrId: string, password: string): Promise<TokenGrant> {
    return this.post<TokenGrant>("/auth/token", {
      name_or_id: nameOrId,
      password,
    });
  }

  health(): Promise<{ status: string }> {
    return this.get("/health");
  }

  outcomes(curriculum?: string): Promise<{ outcomes: OutcomeDoc[] }> {
    const query = curriculum ? `?curriculum=${encodeURIComponent(curriculum)}` : "";
    return this.get(`/outcomes${query}`);
  }

  courses(): Promise<{ courses: CourseDoc[] }> {
    return this.get("/courses");
  }

  classes(): Promise<{ classes: ClassDoc[] }> {
    return this.get("/classes");
  }

  rubrics(): Promise<{ rubrics: RubricDoc[] }> {
    return this.get("/rubrics");
  }

  skills(course?: string): Promise<{ skills: SkillDoc[] }> {
    const query = course ? `?course=${encodeURIComponent(course)}` : "";
    return this.get(`/skills${query}`);
  }

  gradebook(classId: string): Promise<GradebookDoc> {
    return this.get(`/classes/${encodeURIComponent(classId)}/gradebook`);
  }

  studentSkills(studentId: string): Promise<{ student_id: string; skills: SkillViewDoc[] }> {
    return this.get(`/students/${encodeURIComponent(studentId)}/skills`);
  }

  studentAttainment(studentId: string): Promise<StudentAttainmentDoc> {
    return this.get(`/students/${encodeURIComponent(studentId)}/attainment`);
  }

  distribution(outcome: string, scopeQuery: string): Promise<DistributionDoc> {
    return this.get(`/analytics/distribution?outcome=${encodeURIComponent(outcome)}&${scopeQuery}`);
  }

  rollup(curriculum: string, terms?: string): Promise<RollupDoc> {
    const extra = terms ? `&terms=${encodeURIComponent(terms)}` : "";
    return this.get(`/analytics/rollup?curriculum=${encodeURIComponent(curriculum)}${extra}`);
  }

  trend(outcome: string, curriculum: string, terms: string): Promise<TrendDoc> {
    return this.get(
      `/analytics/trend?outcome=${encodeURIComponent(outcome)}` +
        `&curriculum=${encodeURIComponent(curriculum)}&terms=${encodeURIComponent(terms)}`,
    );
  }

  postEvaluation(
    classId: string,
    payload: { rubric_id: string; student_id: string; levels: Record<string, number> },
  ): Promise<Record<string, unknown>> {
    return this.post(`/classes/${encodeURIComponent(classId)}/evaluations`, payload);
  }

  postScore(
    classId: string,
    payload: { student_id: string; item_id: string; raw_score: number },
  ): Promise<ScoreCellDoc> {
    return this.post(`/classes/${encodeURIComponent(classId)}/scores`, payload);
  }

  postSkillRating(payload: {
    student_id: string;
    skill_id: string;
    class_id: string;
    score: number;
  }): Promise<Record<string, unknown>> {
    return this.post("/skill-ratings", payload);
  }

  createSkill(name: string, courseCode: string): Promise<SkillDoc> {
    return this.post("/skills", { name, course_code: courseCode });
  }

  upsertOutcome(doc: {
    outcome_code: string;
    graduate_attribute: string;
    curriculum_version: string;
    active?: boolean;
  }): Promise<OutcomeDoc> {
    return this.post("/outcomes", doc);
  }
}
