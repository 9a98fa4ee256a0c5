/**
 * Session state and client-side role gating. Gating here is UX only; the
 * server's permission matrix remains the authority on every request.
 */

import { ApiClient, TokenGrant } from "./api.js";

export type RoleName = "department_head" | "instructor" | "student";

export interface SessionState {
  token: string;
  role: RoleName;
  userId: string;
  expiresAt: string;
}

export const ROLE_HOME: Record<RoleName, string> = {
  department_head: "#/head",
  instructor: "#/instructor",
  student: "#/student",
};

/** Routes each role may enter; mirrors the server matrix for reads. */
const ROUTE_ROLES: Record<string, RoleName[]> = {
  "#/login": ["department_head", "instructor", "student"],
  "#/head": ["department_head"],
  "#/instructor": ["instructor", "department_head"],
  "#/student": ["student"],
};

export function routeAllowed(route: string, role: RoleName | null): boolean {
  const base = route.split("?")[0] ?? route;
  const allowed = ROUTE_ROLES[base];
  if (!allowed) return false;
  if (base === "#/login") return true;
  return role !== null && allowed.includes(role);
}

export class Session {
  private state: SessionState | null = null;

  constructor(private readonly api: ApiClient) {}

  get current(): SessionState | null {
    return this.state;
  }

  get role(): RoleName | null {
    return this.state?.role ?? null;
  }

  async login(nameOrId: string, password: string): Promise<SessionState> {
    const grant: TokenGrant = await this.api.login(nameOrId, password);
    this.state = {
      token: grant.token,
      role: grant.role,
      userId: grant.user_id,
      expiresAt: grant.expires_at,
    };
    this.api.setToken(grant.token);
    return this.state;
  }

  logout(): void {
    this.state = null;
    this.api.setToken(null);
  }

  homeRoute(): string {
    return this.state ? ROLE_HOME[this.state.role] : "#/login";
  }
}
