typedef struct { double x, y, z; } vec3;

/* Center and squared radius of the sphere through a, b, c, d. */
void sphere_through_points(vec3 a, vec3 b, vec3 c, vec3 d, vec3 *center, double *radius2)
{
    double cx, cy, cz, r2;
    // GMac : SphereThroughPoints
    // GMac.Bind("x1", "Vec3", "a")
    // GMac.Bind("x2", "Vec3", "b")
    // GMac.Bind("x3", "Vec3", "c")
    // GMac.Bind("x4", "Vec3", "d")
    // GMac.Bind("c.e1", "<cx>")
    // GMac.Bind("c.e2", "<cy>")
    // GMac.Bind("c.e3", "<cz>")
    // GMac.Bind("r2.1", "<r2>")
    // GMac end
    center->x = cx;
    center->y = cy;
    center->z = cz;
    *radius2 = r2;
}

/* Plane through a, b, c as normal (nx, ny, nz) and offset w. */
void plane_through_points(vec3 a, vec3 b, vec3 c, double *plane)
{
    double nx, ny, nz, w;
    // GMac : PlaneThroughPoints
    // GMac.Bind("x1", "Vec3", "a")
    // GMac.Bind("x2", "Vec3", "b")
    // GMac.Bind("x3", "Vec3", "c")
    // GMac.Bind("P.e1", "<nx>")
    // GMac.Bind("P.e2", "<ny>")
    // GMac.Bind("P.e3", "<nz>")
    // GMac.Bind("P.einf", "<w>")
    // GMac end
    plane[0] = nx;
    plane[1] = ny;
    plane[2] = nz;
    plane[3] = w;
}
